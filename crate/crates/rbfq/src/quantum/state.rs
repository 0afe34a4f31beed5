//! Dense statevector with an explicit register layout: ancilla qubits first
//! (most significant), then flag qubits, then the system register.

use crate::error::{Error, Result};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write as _;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    pub ancilla_qubits: usize,
    pub flag_qubits: usize,
    pub system_qubits: usize,
}

impl RegisterLayout {
    pub fn total_qubits(&self) -> usize {
        self.ancilla_qubits + self.flag_qubits + self.system_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.total_qubits()
    }

    pub fn system_dim(&self) -> usize {
        1 << self.system_qubits
    }
}

/// Normalized statevector over a described register.
#[derive(Clone, Debug)]
pub struct QuantumRegisterState {
    pub amplitudes: DVector<Complex64>,
    pub layout: RegisterLayout,
}

impl QuantumRegisterState {
    pub fn new(amplitudes: DVector<Complex64>, layout: RegisterLayout) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::Dimension(format!(
                "amplitude length {} vs register dimension {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Simulation(format!(
                "state norm {norm} deviates from 1 beyond 1e-10"
            )));
        }
        Ok(Self { amplitudes, layout })
    }

    pub fn from_real(v: &DVector<f64>, layout: RegisterLayout) -> Result<Self> {
        let amplitudes = DVector::from_iterator(
            v.len(),
            v.iter().map(|&x| Complex64::new(x, 0.0)),
        );
        Self::new(amplitudes, layout)
    }

    /// Overlap magnitude |<self|other>|; insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        fidelity(&self.amplitudes, &other.amplitudes)
    }

    /// Computational-basis measurement outcomes from a seeded generator.
    pub fn sample(&self, seed: u64, shots: usize) -> Vec<usize> {
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for a in self.amplitudes.iter() {
            acc += a.norm_sqr();
            cumulative.push(acc);
        }
        let total = acc;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..shots)
            .map(|_| {
                let r: f64 = rng.gen::<f64>() * total;
                cumulative.partition_point(|&c| c < r).min(cumulative.len() - 1)
            })
            .collect()
    }

    /// One row per basis state: index, real part, imaginary part.
    pub fn write_amplitudes_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        writeln!(file, "index,re,im")?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            writeln!(file, "{i},{:.17e},{:.17e}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// |<a|b>| for raw amplitude vectors.
pub fn fidelity(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "state dimensions {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(a.dotc(b).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn basis(dim: usize, i: usize) -> DVector<Complex64> {
        let mut v = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        v[i] = Complex64::new(1.0, 0.0);
        v
    }

    #[test]
    fn fidelity_basic_cases() {
        let e1 = basis(4, 0);
        let e2 = basis(4, 1);
        assert_eq!(fidelity(&e1, &e1).unwrap(), 1.0);
        assert_eq!(fidelity(&e1, &e2).unwrap(), 0.0);
        assert_eq!(fidelity(&e1, &(-e1.clone())).unwrap(), 1.0);
        assert!(fidelity(&e1, &basis(8, 0)).is_err());
    }

    #[test]
    fn layout_and_norm_are_enforced() {
        let layout = RegisterLayout {
            ancilla_qubits: 1,
            flag_qubits: 0,
            system_qubits: 1,
        };
        assert!(QuantumRegisterState::new(basis(4, 0), layout).is_ok());
        assert!(QuantumRegisterState::new(basis(8, 0), layout).is_err());
        assert!(QuantumRegisterState::new(basis(4, 0).map(|z| 2.0 * z), layout).is_err());
    }

    #[test]
    fn sampling_concentrates_on_the_support() {
        let layout = RegisterLayout {
            ancilla_qubits: 0,
            flag_qubits: 0,
            system_qubits: 2,
        };
        let mut amps = DVector::from_element(4, Complex64::new(0.0, 0.0));
        amps[1] = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[3] = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
        let state = QuantumRegisterState::new(amps, layout).unwrap();
        let shots = state.sample(7, 4000);
        assert!(shots.iter().all(|&s| s == 1 || s == 3));
        let ones = shots.iter().filter(|&&s| s == 1).count() as f64;
        assert_relative_eq!(ones / 4000.0, 0.5, epsilon = 0.05);
        // Seeded sampling is reproducible.
        assert_eq!(shots, state.sample(7, 4000));
    }
}
