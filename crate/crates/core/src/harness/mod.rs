//! Instance I/O, run specifications and the benchmark runner.

pub mod report;
pub mod suite;

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formulation::QuboModel;
use crate::problems::{Family, Instance, MdkpInstance, MisGraph, MspInstance, NamedQubo, QapInstance};

pub use report::{parse_records, render_report, write_report, ReportFormat};
pub use suite::{run_method, run_suite, InstanceSpec, MethodSpec, SuiteConfig, VariationalSpec};

/// Instance name derived from a path: the file name without its last
/// extension (`1tc.8.txt` becomes `1tc.8`).
pub fn instance_name(path: &Path) -> String {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    match file.rsplit_once('.') {
        Some((stem, _)) if !stem.is_empty() => stem.to_string(),
        _ => file,
    }
}

pub fn parse_instance_text(text: &str, family: Family, name: &str) -> Result<Instance> {
    Ok(match family {
        Family::Mdkp => Instance::Mdkp(MdkpInstance::parse(text, name)?),
        Family::Mis => Instance::Mis(MisGraph::parse(text, name)?),
        Family::Qap => Instance::Qap(QapInstance::parse(text, name)?),
        Family::Msp => Instance::Msp(MspInstance::parse(text, name)?),
        Family::Qubo => Instance::Qubo(NamedQubo {
            name: name.to_string(),
            qubo: QuboModel::from_text(text, name)?,
        }),
    })
}

pub fn load_instance(path: &Path, family: Family) -> Result<Instance> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut inst = parse_instance_text(&text, family, &origin)?;
    let name = instance_name(path);
    match &mut inst {
        Instance::Mdkp(i) => i.name = name,
        Instance::Mis(g) => g.name = name,
        Instance::Qap(q) => q.name = name,
        Instance::Msp(m) => m.name = name,
        Instance::Qubo(q) => q.name = name,
    }
    Ok(inst)
}

pub fn instance_to_text(instance: &Instance) -> String {
    match instance {
        Instance::Mdkp(i) => i.to_text(),
        Instance::Mis(g) => g.to_text(),
        Instance::Qap(q) => q.to_text(),
        Instance::Msp(m) => m.to_text(),
        Instance::Qubo(q) => q.qubo.to_text(),
    }
}

pub fn save_instance(instance: &Instance, path: &Path) -> Result<()> {
    fs::write(path, instance_to_text(instance)).map_err(|e| Error::io(path, e))
}

/// Deterministic per-run seed from the suite seed, instance and method.
pub fn derive_seed(global: u64, instance: &str, method: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    h.update(instance.as_bytes());
    h.update([0u8]);
    h.update(method.as_bytes());
    let digest = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_drop_last_extension() {
        assert_eq!(instance_name(Path::new("data/mis/1tc.8.txt")), "1tc.8");
        assert_eq!(instance_name(Path::new("hp1")), "hp1");
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let a = derive_seed(7, "1tc.8", "pce");
        assert_eq!(a, derive_seed(7, "1tc.8", "pce"));
        assert_ne!(a, derive_seed(7, "1tc.8", "vqe"));
        assert_ne!(a, derive_seed(8, "1tc.8", "pce"));
        assert_ne!(derive_seed(1, "ab", "c"), derive_seed(1, "a", "bc"));
    }
}
