//! Writes assembled Hamiltonians, ground states and Schmidt spectra in the
//! binary array format, plus the spectra as CSV.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use nnichain::nni_hamiltonian::{assemble, ground_state};
use nnichain::tensor_core::{
    schmidt_spectrum, spectrum_to_csv, write_matrix, write_spectrum, write_state,
};

use crate::config::ExperimentConfig;
use crate::report::slug;
use crate::CliError;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(path)?))
}

/// For every model and chain length: `<model>_d<d>_hamiltonian.bin`,
/// `<model>_d<d>_ground.bin` and, for every cut in the j grid (default the
/// middle), `<model>_d<d>_cut<j>.bin` and `.csv`.
pub fn export(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    for model in cfg.models() {
        let stem = slug(&model.label());
        let mut ds = cfg.grid.d.clone();
        ds.sort_unstable();
        ds.dedup();
        for d in ds {
            let spec = model.build(d)?;
            let h = assemble(&spec)?;
            let base = format!("{stem}_d{d}");
            let path = dir.join(format!("{base}_hamiltonian.bin"));
            write_matrix(&mut create(&path)?, spec.dims(), &h)?;
            files.push(path);
            let gs = ground_state(&spec)?;
            let path = dir.join(format!("{base}_ground.bin"));
            write_state(&mut create(&path)?, &gs.state)?;
            files.push(path);
            let mut cuts = cfg.grid.j.clone().unwrap_or_else(|| vec![d / 2]);
            cuts.sort_unstable();
            cuts.dedup();
            for j in cuts.into_iter().filter(|&j| j >= 1 && j < d) {
                let sp = schmidt_spectrum(&gs.state, j)?;
                let path = dir.join(format!("{base}_cut{j}.bin"));
                write_spectrum(&mut create(&path)?, &sp)?;
                files.push(path);
                let path = dir.join(format!("{base}_cut{j}.csv"));
                spectrum_to_csv(&path, &sp)?;
                files.push(path);
            }
        }
    }
    Ok(files)
}
