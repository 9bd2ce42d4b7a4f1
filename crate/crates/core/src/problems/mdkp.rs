//! Multidimensional knapsack instances (SAC-94 text format).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{format_row, Feasibility, Scanner};
use crate::error::{Error, Result};
use crate::formulation::{IlpModel, Sense};

#[derive(Debug, Clone, PartialEq)]
pub struct MdkpInstance {
    pub name: String,
    pub profits: Vec<f64>,
    /// One row per dimension, one column per item.
    pub weights: Vec<Vec<f64>>,
    pub capacities: Vec<f64>,
    pub known_optimum: Option<f64>,
}

impl MdkpInstance {
    pub fn new(
        name: impl Into<String>,
        profits: Vec<f64>,
        weights: Vec<Vec<f64>>,
        capacities: Vec<f64>,
    ) -> Result<Self> {
        let inst = Self {
            name: name.into(),
            profits,
            weights,
            capacities,
            known_optimum: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn num_items(&self) -> usize {
        self.profits.len()
    }

    pub fn num_dimensions(&self) -> usize {
        self.capacities.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_items();
        if self.weights.len() != self.num_dimensions() {
            return Err(Error::dims(format!(
                "{} weight rows for {} capacities",
                self.weights.len(),
                self.num_dimensions()
            )));
        }
        if let Some(row) = self.weights.iter().find(|r| r.len() != n) {
            return Err(Error::dims(format!("weight row of length {} for {n} items", row.len())));
        }
        let negative = self.weights.iter().flatten().chain(&self.capacities).any(|&v| v < 0.0);
        if negative {
            return Err(Error::Invalid("weights and capacities must be non-negative".into()));
        }
        Ok(())
    }

    /// Maximization ILP with one `<=` row per dimension.
    pub fn to_ilp(&self) -> IlpModel {
        let mut ilp = IlpModel::binary(self.profits.clone(), Sense::Maximize);
        for (row, &c) in self.weights.iter().zip(&self.capacities) {
            ilp.add_le(row.clone(), c);
        }
        ilp
    }

    /// Capacity over total weight, per dimension.
    pub fn tightness_ratios(&self) -> Result<Vec<f64>> {
        self.weights
            .iter()
            .zip(&self.capacities)
            .enumerate()
            .map(|(j, (row, &c))| {
                let total: f64 = row.iter().sum();
                if total == 0.0 {
                    Err(Error::DegenerateDimension(j))
                } else {
                    Ok(c / total)
                }
            })
            .collect()
    }

    /// Capacity excess per dimension for a selection vector.
    pub fn check_feasibility(&self, x: &[i64]) -> Result<Feasibility> {
        if x.len() != self.num_items() {
            return Err(Error::dims(format!(
                "selection of length {} for {} items",
                x.len(),
                self.num_items()
            )));
        }
        let excess = self.weights.iter().zip(&self.capacities).map(|(row, &c)| {
            let load: f64 = row.iter().zip(x).map(|(w, &v)| w * v as f64).sum();
            (load - c).max(0.0)
        });
        let bounds = x.iter().map(|&v| if (0..=1).contains(&v) { 0.0 } else { 1.0 });
        Ok(Feasibility::from_residuals(excess.chain(bounds)))
    }

    pub fn profit(&self, x: &[i64]) -> f64 {
        self.profits.iter().zip(x).map(|(p, &v)| p * v as f64).sum()
    }

    pub fn parse(text: &str, name: &str) -> Result<Self> {
        let mut sc = Scanner::new(text, name);
        let n: usize = sc.number("header")?;
        let m: usize = sc.number("header")?;
        let optimum: f64 = sc.number("header")?;
        let profits = sc.numbers(n, "profits")?;
        let mut weights = Vec::with_capacity(m);
        for j in 0..m {
            weights.push(sc.numbers(n, &format!("weights of dimension {}", j + 1))?);
        }
        let capacities = sc.numbers(m, "capacities")?;
        sc.expect_end()?;
        let mut inst = Self::new(name, profits, weights, capacities)?;
        inst.known_optimum = (optimum > 0.0).then_some(optimum);
        Ok(inst)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {}\n{}\n",
            self.num_items(),
            self.num_dimensions(),
            self.known_optimum.unwrap_or(0.0),
            format_row(&self.profits)
        );
        for row in &self.weights {
            out.push_str(&format_row(row));
            out.push('\n');
        }
        out.push_str(&format_row(&self.capacities));
        out.push('\n');
        out
    }
}

/// Random instance generator with integer weights and a fixed tightness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdkpGenerator {
    pub items: usize,
    pub dimensions: usize,
    pub tightness: f64,
    pub max_weight: u32,
    pub max_profit: u32,
}

impl MdkpGenerator {
    pub fn new(items: usize, dimensions: usize, tightness: f64) -> Self {
        Self {
            items,
            dimensions,
            tightness,
            max_weight: 100,
            max_profit: 100,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<MdkpInstance> {
        if self.items == 0 || self.dimensions == 0 || self.max_weight == 0 || self.max_profit == 0 {
            return Err(Error::Invalid("generator sizes must be positive".into()));
        }
        if !(self.tightness > 0.0 && self.tightness <= 1.0) {
            return Err(Error::Invalid(format!("tightness {} outside (0, 1]", self.tightness)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profits = (0..self.items)
            .map(|_| rng.random_range(1..=self.max_profit) as f64)
            .collect();
        let weights: Vec<Vec<f64>> = (0..self.dimensions)
            .map(|_| {
                (0..self.items)
                    .map(|_| rng.random_range(1..=self.max_weight) as f64)
                    .collect()
            })
            .collect();
        let capacities = weights
            .iter()
            .map(|row| self.tightness * row.iter().sum::<f64>())
            .collect();
        MdkpInstance::new(
            format!("mdkp-{}x{}-s{seed}", self.items, self.dimensions),
            profits,
            weights,
            capacities,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        let inst = MdkpInstance::new(
            "t",
            vec![1.0, 1.0],
            vec![vec![60.0, 40.0], vec![3.0, 7.0]],
            vec![50.0, 10.0],
        )
        .unwrap();
        assert_eq!(inst.tightness_ratios().unwrap(), vec![0.5, 1.0]);
    }

    #[test]
    fn degenerate_dimension() {
        let inst = MdkpInstance::new("t", vec![1.0], vec![vec![0.0]], vec![5.0]).unwrap();
        assert!(matches!(inst.tightness_ratios(), Err(Error::DegenerateDimension(0))));
    }

    #[test]
    fn generated_tightness() {
        let inst = MdkpGenerator::new(15, 4, 0.25).generate(3).unwrap();
        for r in inst.tightness_ratios().unwrap() {
            assert!((r - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn text_round_trip() {
        let mut inst = MdkpGenerator::new(5, 2, 0.5).generate(1).unwrap();
        inst.capacities = vec![100.0, 120.0];
        inst.known_optimum = Some(77.0);
        let back = MdkpInstance::parse(&inst.to_text(), &inst.name).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn truncated_file_names_section() {
        let err = MdkpInstance::parse("3 2 10\n1 2 3\n4 5 6\n7 8", "trunc").unwrap_err();
        assert!(err.to_string().contains("dimension 2"), "{err}");
        let err = MdkpInstance::parse("3 2 10\n1 2 3\n4 5 6\n7 8 9\n5", "trunc").unwrap_err();
        assert!(err.to_string().contains("capacities"), "{err}");
    }

    #[test]
    fn feasibility_reports_excess() {
        let inst = MdkpInstance::new("t", vec![1.0, 1.0], vec![vec![3.0, 4.0]], vec![5.0]).unwrap();
        let f = inst.check_feasibility(&[1, 1]).unwrap();
        assert_eq!((f.feasible, f.violated, f.magnitude), (false, 1, 2.0));
        assert!(inst.check_feasibility(&[0, 1]).unwrap().feasible);
    }
}
