//! Matrix Market exchange for the sparse operators and single-column CSV for
//! vectors.

use crate::error::{Error, Result};
use nalgebra::DVector;
use nalgebra_sparse::io::{load_coo_from_matrix_market_file, save_to_matrix_market_file};
use nalgebra_sparse::CscMatrix;
use std::io::{BufRead, Write as _};
use std::path::Path;

pub fn save_matrix_market(matrix: &CscMatrix<f64>, path: &Path) -> Result<()> {
    save_to_matrix_market_file(matrix, path).map_err(|e| Error::Io(std::io::Error::other(e)))
}

pub fn load_matrix_market(path: &Path) -> Result<CscMatrix<f64>> {
    let coo = load_coo_from_matrix_market_file(path)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(CscMatrix::from(&coo))
}

/// One value per line, full round-trip precision.
pub fn write_vector_csv(v: &DVector<f64>, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    for x in v.iter() {
        writeln!(file, "{x:.17e}")?;
    }
    Ok(())
}

pub fn read_vector_csv(path: &Path) -> Result<DVector<f64>> {
    let file = std::fs::File::open(path)?;
    let mut values = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        values.push(
            trimmed
                .parse::<f64>()
                .map_err(|e| Error::Serde(format!("bad vector entry {trimmed:?}: {e}")))?,
        );
    }
    if values.is_empty() {
        return Err(Error::Serde("vector file holds no values".into()));
    }
    Ok(DVector::from_vec(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra_sparse::CooMatrix;

    #[test]
    fn matrix_market_round_trip() {
        let mut coo = CooMatrix::new(3, 3);
        coo.push(0, 0, 2.5);
        coo.push(1, 2, -1.0);
        coo.push(2, 1, -1.0);
        let m = CscMatrix::from(&coo);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.mtx");
        save_matrix_market(&m, &path).unwrap();
        let back = load_matrix_market(&path).unwrap();
        assert_eq!(back.nrows(), 3);
        assert_eq!(back.get_entry(0, 0).unwrap().into_value(), 2.5);
        assert_eq!(back.get_entry(1, 2).unwrap().into_value(), -1.0);
    }

    #[test]
    fn vector_csv_round_trip_is_exact() {
        let v = DVector::from_vec(vec![1.0 / 3.0, -2.25e-8, 7.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        write_vector_csv(&v, &path).unwrap();
        let back = read_vector_csv(&path).unwrap();
        assert_eq!(v, back);
    }
}
