use proptest::prelude::*;

use qubobench::formulation::{bits_to_spins, qubo_to_ising, QuboModel};
use qubobench::harness::{instance_to_text, parse_instance_text};
use qubobench::problems::mdkp::MdkpGenerator;
use qubobench::problems::msp::{generate_msp, TargetMode};
use qubobench::problems::{Family, Instance, MisGraph, QapInstance};
use qubobench::simulator::Circuit;
use qubobench::Error;

fn qubo_strategy() -> impl Strategy<Value = QuboModel> {
    (1usize..7).prop_flat_map(|n| {
        (
            prop::collection::vec(-10i32..10, n * (n - 1) / 2),
            prop::collection::vec(-10i32..10, n),
            -5i32..5,
        )
            .prop_map(move |(quad, lin, off)| {
                let mut q = QuboModel::zeros(n);
                let mut k = 0;
                for (i, &l) in lin.iter().enumerate() {
                    for j in i + 1..n {
                        q.add_quadratic(i, j, quad[k] as f64 / 2.0);
                        k += 1;
                    }
                    q.add_linear(i, l as f64);
                }
                q.offset = off as f64;
                q
            })
    })
}

proptest! {
    #[test]
    fn ising_energy_matches_qubo(q in qubo_strategy(), mask in any::<u64>()) {
        let n = q.dimension();
        let bits: Vec<u8> = (0..n).map(|i| ((mask >> i) & 1) as u8).collect();
        let ising = qubo_to_ising(&q);
        prop_assert!((ising.energy(&bits_to_spins(&bits)) - q.energy(&bits)).abs() < 1e-9);
    }

    #[test]
    fn qubo_text_round_trip(q in qubo_strategy()) {
        let back = QuboModel::from_text(&q.to_text(), "mem").unwrap();
        for mask in 0u64..1 << q.dimension() {
            let bits: Vec<u8> = (0..q.dimension()).map(|i| ((mask >> i) & 1) as u8).collect();
            prop_assert_eq!(back.energy(&bits), q.energy(&bits));
        }
    }
}

fn round_trip(inst: &Instance) -> Instance {
    let mut back = parse_instance_text(&instance_to_text(inst), inst.family(), inst.name()).unwrap();
    if let (Some(v), None) = (inst.best_known(), back.best_known()) {
        back.set_best_known(v);
    }
    back
}

#[test]
fn every_family_round_trips() {
    let mdkp = Instance::Mdkp(MdkpGenerator::new(7, 3, 0.4).generate(2).unwrap());
    let msp = Instance::Msp(generate_msp(3, 100, 4, TargetMode::Interval).unwrap());
    let mis = Instance::Mis(MisGraph::random(10, 0.3, 1));
    let qap = Instance::Qap(
        QapInstance::new(
            "q3",
            vec![vec![0.0, 2.0, 1.0], vec![2.0, 0.0, 4.0], vec![1.0, 4.0, 0.0]],
            vec![vec![0.0, 3.0, 5.0], vec![3.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]],
        )
        .unwrap(),
    );
    for inst in [mdkp, msp, qap] {
        assert_eq!(round_trip(&inst), inst, "{}", inst.family());
    }
    let Instance::Mis(g) = &mis else { unreachable!() };
    let Instance::Mis(back) = round_trip(&mis) else {
        unreachable!()
    };
    assert_eq!(back.edges(), g.edges());
}

#[test]
fn parse_errors_carry_positions() {
    let cases: &[(Family, &str, (usize, usize))] = &[
        (Family::Qubo, "2 0\n0 1 x\n", (2, 5)),
        (Family::Mis, "p 4\n1 9\n", (2, 3)),
        (Family::Qap, "2\n0 1\n1 0\n0 3\n", (4, 4)),
        (Family::Mdkp, "3 1 0\n1 2\n", (2, 4)),
    ];
    for (family, text, (line, column)) in cases {
        match parse_instance_text(text, *family, "t.txt") {
            Err(Error::Parse { line: l, column: c, .. }) => {
                assert_eq!((l, c), (*line, *column), "{family}: {text:?}")
            }
            other => panic!("{family}: expected parse error, got {other:?}"),
        }
    }
}

#[test]
fn circuit_text_round_trip() {
    let c = qubobench::pce::build_brickwork(&qubobench::pce::BrickworkConfig::new(3)).unwrap();
    assert_eq!(Circuit::from_text(&c.to_text()).unwrap(), c);
}
