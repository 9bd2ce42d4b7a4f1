//! Market split instances.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{format_row, Feasibility};
use crate::error::{Error, Result};
use crate::formulation::{IlpModel, Sense};

pub const DEFAULT_SPREAD: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetMode {
    /// `b_i = floor(sum_j a_ij / 2)`.
    #[default]
    Half,
    /// `b_i` uniform on the `D`-wide integer interval starting at
    /// `floor((sum_j a_ij - D) / 2)`.
    Interval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MspInstance {
    pub name: String,
    /// `m x n` demand matrix.
    pub a: Vec<Vec<u64>>,
    pub b: Vec<i64>,
    pub seed: Option<u64>,
    pub spread: Option<u64>,
    pub known_optimum: Option<f64>,
}

impl MspInstance {
    pub fn new(name: impl Into<String>, a: Vec<Vec<u64>>, b: Vec<i64>) -> Result<Self> {
        let inst = Self {
            name: name.into(),
            a,
            b,
            seed: None,
            spread: None,
            known_optimum: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn num_retailers(&self) -> usize {
        self.a.len()
    }

    pub fn num_products(&self) -> usize {
        self.a.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() || self.num_products() == 0 {
            return Err(Error::EmptyInput);
        }
        let n = self.num_products();
        if self.a.iter().any(|r| r.len() != n) {
            return Err(Error::dims("demand rows have different lengths"));
        }
        if self.b.len() != self.a.len() {
            return Err(Error::dims(format!(
                "{} targets for {} retailers",
                self.b.len(),
                self.a.len()
            )));
        }
        Ok(())
    }

    /// Slack bound `max(|b_i|, |b_i - sum_j a_ij|)`.
    pub fn slack_bound(&self, i: usize) -> u64 {
        let total: i64 = self.a[i].iter().map(|&v| v as i64).sum();
        self.b[i].unsigned_abs().max((self.b[i] - total).unsigned_abs())
    }

    /// Variables `x_1..x_n`, then `s+_i, s-_i` for each retailer.
    pub fn to_ilp(&self) -> IlpModel {
        let (m, n) = (self.num_retailers(), self.num_products());
        let mut objective = vec![0.0; n];
        objective.extend(std::iter::repeat_n(1.0, 2 * m));
        let mut upper = vec![1u64; n];
        for i in 0..m {
            let u = self.slack_bound(i);
            upper.extend([u, u]);
        }
        let mut ilp = IlpModel::new(objective, Sense::Minimize, upper);
        for i in 0..m {
            let mut row: Vec<f64> = self.a[i].iter().map(|&v| v as f64).collect();
            row.resize(n + 2 * m, 0.0);
            row[n + 2 * i] = 1.0;
            row[n + 2 * i + 1] = -1.0;
            ilp.add_eq(row, self.b[i] as f64);
        }
        ilp
    }

    /// Residual of each retailer row: `sum_j a_ij x_j - b_i`.
    pub fn residuals(&self, x: &[u8]) -> Vec<i64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, &b)| row.iter().zip(x).map(|(&a, &v)| a as i64 * v as i64).sum::<i64>() - b)
            .collect()
    }

    /// Total deviation `sum_i |sum_j a_ij x_j - b_i|`.
    pub fn deviation(&self, x: &[u8]) -> i64 {
        self.residuals(x).iter().map(|r| r.abs()).sum()
    }

    /// Checks `(x, s+, s-)` laid out as in [`MspInstance::to_ilp`].
    pub fn check_feasibility(&self, v: &[i64]) -> Result<Feasibility> {
        let (m, n) = (self.num_retailers(), self.num_products());
        if v.len() != n + 2 * m {
            return Err(Error::dims(format!("vector of length {} for n={n}, m={m}", v.len())));
        }
        let rows = (0..m).map(|i| {
            let load: i64 = self.a[i].iter().zip(v).map(|(&a, &x)| a as i64 * x).sum();
            (load + v[n + 2 * i] - v[n + 2 * i + 1] - self.b[i]) as f64
        });
        let bounds = v.iter().enumerate().map(|(k, &x)| {
            let hi = if k < n { 1 } else { self.slack_bound((k - n) / 2) as i64 };
            if x < 0 {
                -x as f64
            } else {
                (x - hi).max(0) as f64
            }
        });
        Ok(Feasibility::from_residuals(rows.chain(bounds)))
    }

    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse {
            path: name.to_string(),
            line,
            column: 1,
            message,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });
        let mut inst_name = name.to_string();
        let (mut seed, mut spread, mut optimum) = (None, None, None);
        let (mut m, mut n) = (None, None);
        let mut a = Vec::new();
        let mut b = None;
        while let Some((ln, line)) = lines.next() {
            let (key, rest) = line.trim().split_once(char::is_whitespace).unwrap_or((line.trim(), ""));
            let rest = rest.trim();
            let num =
                |s: &str| -> Result<u64> { s.parse().map_err(|_| perr(ln + 1, format!("bad value for `{key}`"))) };
            match key {
                "name" => inst_name = rest.to_string(),
                "seed" => seed = Some(num(rest)?),
                "d" | "D" => spread = Some(num(rest)?),
                "m" => m = Some(num(rest)? as usize),
                "n" => n = Some(num(rest)? as usize),
                "optimum" => {
                    optimum = Some(
                        rest.parse()
                            .map_err(|_| perr(ln + 1, "bad value for `optimum`".into()))?,
                    )
                }
                "b" => {
                    let vals: std::result::Result<Vec<i64>, _> = rest.split_whitespace().map(str::parse).collect();
                    b = Some(vals.map_err(|_| perr(ln + 1, "bad target".into()))?);
                }
                "a" => {
                    let (m, n) = match (m, n) {
                        (Some(m), Some(n)) => (m, n),
                        _ => return Err(perr(ln + 1, "`m` and `n` must precede the `a` block".into())),
                    };
                    for r in 0..m {
                        let (rl, row) = lines
                            .next()
                            .ok_or_else(|| perr(ln + 1, format!("missing demand row {}", r + 1)))?;
                        let vals: std::result::Result<Vec<u64>, _> = row.split_whitespace().map(str::parse).collect();
                        let vals = vals.map_err(|_| perr(rl + 1, format!("bad demand row {}", r + 1)))?;
                        if vals.len() != n {
                            return Err(perr(
                                rl + 1,
                                format!("demand row {} has {} entries, expected {n}", r + 1, vals.len()),
                            ));
                        }
                        a.push(vals);
                    }
                }
                other => return Err(perr(ln + 1, format!("unknown key `{other}`"))),
            }
        }
        let b = b.ok_or_else(|| perr(1, "missing `b`".into()))?;
        let mut inst = Self::new(inst_name, a, b)?;
        inst.seed = seed;
        inst.spread = spread;
        inst.known_optimum = optimum;
        Ok(inst)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("name {}\n", self.name);
        if let Some(s) = self.seed {
            let _ = writeln!(out, "seed {s}");
        }
        if let Some(d) = self.spread {
            let _ = writeln!(out, "d {d}");
        }
        if let Some(o) = self.known_optimum {
            let _ = writeln!(out, "optimum {o}");
        }
        let _ = writeln!(out, "m {}\nn {}\na", self.num_retailers(), self.num_products());
        for row in &self.a {
            out.push_str(&format_row(row));
            out.push('\n');
        }
        let _ = writeln!(out, "b {}", format_row(&self.b));
        out
    }
}

/// Random instance with `n = 10(m-1)` products and demands uniform on `0..=99`.
pub fn generate_msp(m: usize, spread: u64, seed: u64, mode: TargetMode) -> Result<MspInstance> {
    if m < 2 {
        return Err(Error::Invalid(format!("need at least 2 retailers, got {m}")));
    }
    if spread == 0 {
        return Err(Error::Invalid("spread must be at least 1".into()));
    }
    let n = 10 * (m - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<Vec<u64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(0..=99u64)).collect())
        .collect();
    let b = a
        .iter()
        .map(|row| {
            let total = row.iter().sum::<u64>() as i64;
            match mode {
                TargetMode::Half => total.div_euclid(2),
                TargetMode::Interval => {
                    let lo = (total - spread as i64).div_euclid(2);
                    lo + rng.random_range(0..spread as i64)
                }
            }
        })
        .collect();
    let mut inst = MspInstance::new(format!("msp-m{m}-s{seed}"), a, b)?;
    inst.seed = Some(seed);
    inst.spread = Some(spread);
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_follow_retailer_count() {
        assert_eq!(
            generate_msp(10, DEFAULT_SPREAD, 1, TargetMode::Half)
                .unwrap()
                .num_products(),
            90
        );
        assert_eq!(
            generate_msp(2, DEFAULT_SPREAD, 1, TargetMode::Half)
                .unwrap()
                .num_products(),
            10
        );
        assert!(generate_msp(1, DEFAULT_SPREAD, 1, TargetMode::Half).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_msp(3, DEFAULT_SPREAD, 42, TargetMode::Half).unwrap();
        let b = generate_msp(3, DEFAULT_SPREAD, 42, TargetMode::Half).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        for (row, &t) in a.a.iter().zip(&a.b) {
            assert!(row.iter().all(|&v| v <= 99));
            assert_eq!(t, row.iter().sum::<u64>() as i64 / 2);
        }
    }

    #[test]
    fn interval_targets_stay_in_range() {
        let inst = generate_msp(4, 10, 9, TargetMode::Interval).unwrap();
        for (row, &t) in inst.a.iter().zip(&inst.b) {
            let lo = (row.iter().sum::<u64>() as i64 - 10).div_euclid(2);
            assert!((lo..lo + 10).contains(&t));
        }
    }

    #[test]
    fn slack_bound_example() {
        let inst = MspInstance::new("t", vec![vec![60, 40]], vec![50]).unwrap();
        assert_eq!(inst.slack_bound(0), 50);
        let ilp = inst.to_ilp();
        assert_eq!(ilp.upper_bounds, vec![1, 1, 50, 50]);
    }

    #[test]
    fn feasibility_residuals() {
        let inst = MspInstance::new("t", vec![vec![5]; 3], vec![0, 0, 0]).unwrap();
        // x=0 with slack differences giving residuals (0, 3, -2)
        let f = inst.check_feasibility(&[0, 0, 0, 3, 0, 0, 2]).unwrap();
        assert_eq!((f.feasible, f.violated, f.magnitude), (false, 2, 5.0));
    }

    #[test]
    fn text_round_trip() {
        let mut inst = generate_msp(3, 7, 5, TargetMode::Interval).unwrap();
        inst.known_optimum = Some(2.0);
        assert_eq!(MspInstance::parse(&inst.to_text(), "x").unwrap(), inst);
    }
}
