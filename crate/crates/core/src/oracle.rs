//! Dense statevector simulator over physical qubits.
//!
//! Basis index bit `q` holds qubit `q`: qubit `q` of basis state `idx` is
//! `(idx >> q) & 1`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest register the dense simulator allocates by default (2^26 amplitudes).
pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Forced outcomes below this probability are rejected.
pub const MIN_BRANCH_PROBABILITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Z,
}

/// Tensor product of one Pauli type over a set of sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub pauli: Pauli,
    pub sites: Vec<usize>,
}

impl PauliTerm {
    pub fn x(sites: Vec<usize>) -> Self {
        Self { pauli: Pauli::X, sites }
    }

    pub fn z(sites: Vec<usize>) -> Self {
        Self { pauli: Pauli::Z, sites }
    }
}

/// Single-qubit measurement basis. Outcome 0 selects the first vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "theta")]
pub enum MeasurementBasis {
    Z,
    X,
    /// `(|0> ± e^{-iθ}|1>)/√2`.
    ZRot(f64),
    /// `cos(θ/2)|0> + i sin(θ/2)|1>` and `sin(θ/2)|0> - i cos(θ/2)|1>`.
    XRot(f64),
}

impl MeasurementBasis {
    /// The two basis vectors as `[[<0|v0>, <1|v0>], [<0|v1>, <1|v1>]]`.
    pub fn vectors(&self) -> [[C64; 2]; 2] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match *self {
            MeasurementBasis::Z => [
                [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            ],
            MeasurementBasis::X => [
                [C64::new(h, 0.0), C64::new(h, 0.0)],
                [C64::new(h, 0.0), C64::new(-h, 0.0)],
            ],
            MeasurementBasis::ZRot(theta) => {
                let p = C64::from_polar(h, -theta);
                [[C64::new(h, 0.0), p], [C64::new(h, 0.0), -p]]
            }
            MeasurementBasis::XRot(theta) => {
                let (s, c) = (theta / 2.0).sin_cos();
                [
                    [C64::new(c, 0.0), C64::new(0.0, s)],
                    [C64::new(s, 0.0), C64::new(0.0, -c)],
                ]
            }
        }
    }

    /// Coefficients of the bra `<v_outcome|` on `|0>` and `|1>`.
    pub fn bra(&self, outcome: u8) -> [C64; 2] {
        let v = self.vectors()[outcome as usize & 1];
        [v[0].conj(), v[1].conj()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    n: usize,
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "qubit count",
            actual: n,
            limit: cap,
        });
    }
    Ok(())
}

fn check_distinct(n: usize, sites: &[usize]) -> Result<()> {
    for (k, &s) in sites.iter().enumerate() {
        if s >= n {
            return Err(Error::Range(format!("site {s} outside register of {n} qubits")));
        }
        if sites[..k].contains(&s) {
            return Err(Error::InvalidArgument(format!("site {s} listed twice")));
        }
    }
    Ok(())
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0, DEFAULT_QUBIT_CAP)
    }

    pub fn basis(n: usize, index: usize, cap: usize) -> Result<Self> {
        check_cap(n, cap)?;
        if index >> n != 0 {
            return Err(Error::Range(format!("basis index {index} on {n} qubits")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps, n })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::InvalidArgument(format!(
                "{} amplitudes for {n} qubits",
                amps.len()
            )));
        }
        Ok(Self { amps, n })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm; returns the norm before scaling.
    pub fn normalize(&mut self) -> f64 {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
        norm
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Rotates the global phase so the first nonzero amplitude is real positive.
    pub fn fix_global_phase(&mut self, tol: f64) {
        if let Some(first) = self.amps.iter().find(|a| a.norm() > tol) {
            let phase = first.conj() / first.norm();
            self.amps.iter_mut().for_each(|a| *a *= phase);
        }
    }

    /// Largest amplitude-wise deviation.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply_pauli_string(&mut self, sites: &[usize], which: Pauli) -> Result<()> {
        check_distinct(self.n, sites)?;
        let mask: usize = sites.iter().map(|&s| 1usize << s).sum();
        match which {
            Pauli::X => {
                for idx in 0..self.amps.len() {
                    let j = idx ^ mask;
                    if idx < j {
                        self.amps.swap(idx, j);
                    }
                }
            }
            Pauli::Z => {
                for (idx, a) in self.amps.iter_mut().enumerate() {
                    if (idx & mask).count_ones() % 2 == 1 {
                        *a = -*a;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_term(&mut self, term: &PauliTerm) -> Result<()> {
        self.apply_pauli_string(&term.sites, term.pauli)
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        check_distinct(self.n, &[a, b])?;
        let mask = (1usize << a) | (1usize << b);
        for (idx, amp) in self.amps.iter_mut().enumerate() {
            if idx & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// Applies a 2x2 matrix `m` (row-major, `m[out][in]`) to `site`.
    pub fn apply_single(&mut self, site: usize, m: [[C64; 2]; 2]) -> Result<()> {
        check_distinct(self.n, &[site])?;
        let bit = 1usize << site;
        for idx in 0..self.amps.len() {
            if idx & bit == 0 {
                let a0 = self.amps[idx];
                let a1 = self.amps[idx | bit];
                self.amps[idx] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[idx | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Probabilities of outcomes 0 and 1 for measuring `site` in `basis`,
    /// relative to the current (not necessarily unit) norm.
    pub fn outcome_probabilities(&self, site: usize, basis: MeasurementBasis) -> Result<[f64; 2]> {
        check_distinct(self.n, &[site])?;
        let total = self.norm_sqr();
        let mut p = [0.0; 2];
        for (outcome, slot) in p.iter_mut().enumerate() {
            let bra = basis.bra(outcome as u8);
            let bit = 1usize << site;
            let mut acc = 0.0;
            for idx in 0..self.amps.len() {
                if idx & bit == 0 {
                    acc += (bra[0] * self.amps[idx] + bra[1] * self.amps[idx | bit]).norm_sqr();
                }
            }
            *slot = acc / total;
        }
        Ok(p)
    }

    /// Projective measurement. The qubit stays in the register, collapsed onto
    /// the selected basis vector. Returns the outcome and its probability.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        site: usize,
        basis: MeasurementBasis,
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<(u8, f64)> {
        let p = self.outcome_probabilities(site, basis)?;
        let outcome = self.choose(site, p, forced, rng)?;
        let vecs = basis.vectors();
        let v = vecs[outcome as usize];
        let bra = basis.bra(outcome);
        let bit = 1usize << site;
        for idx in 0..self.amps.len() {
            if idx & bit == 0 {
                let overlap = bra[0] * self.amps[idx] + bra[1] * self.amps[idx | bit];
                self.amps[idx] = v[0] * overlap;
                self.amps[idx | bit] = v[1] * overlap;
            }
        }
        self.normalize();
        Ok((outcome, p[outcome as usize]))
    }

    /// Measures `site` and removes it from the register, leaving a state on
    /// `n - 1` qubits (higher sites shift down by one).
    pub fn measure_out<R: Rng + ?Sized>(
        &self,
        site: usize,
        basis: MeasurementBasis,
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<(u8, f64, StateVector)> {
        let p = self.outcome_probabilities(site, basis)?;
        let outcome = self.choose(site, p, forced, rng)?;
        let mut out = self.project_out(site, basis.bra(outcome))?;
        out.normalize();
        Ok((outcome, p[outcome as usize], out))
    }

    /// Contracts `site` against a bra, without renormalizing.
    pub fn project_out(&self, site: usize, bra: [C64; 2]) -> Result<StateVector> {
        check_distinct(self.n, &[site])?;
        let low = (1usize << site) - 1;
        let mut amps = Vec::with_capacity(self.amps.len() / 2);
        for rest in 0..(self.amps.len() / 2) {
            let idx = (rest & low) | ((rest & !low) << 1);
            amps.push(bra[0] * self.amps[idx] + bra[1] * self.amps[idx | (1 << site)]);
        }
        Ok(StateVector {
            amps,
            n: self.n - 1,
        })
    }

    fn choose<R: Rng + ?Sized>(
        &self,
        site: usize,
        p: [f64; 2],
        forced: Option<u8>,
        rng: &mut R,
    ) -> Result<u8> {
        match forced {
            Some(outcome) => {
                let outcome = outcome & 1;
                if p[outcome as usize] <= MIN_BRANCH_PROBABILITY {
                    return Err(Error::ImpossibleOutcome { site, outcome });
                }
                Ok(outcome)
            }
            None => Ok(u8::from(rng.random::<f64>() >= p[0])),
        }
    }

    pub fn expectation(&self, term: &PauliTerm) -> Result<f64> {
        let mut moved = self.clone();
        moved.apply_term(term)?;
        Ok(self.inner(&moved).re / self.norm_sqr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_amplitudes(1, vec![C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap()
    }

    #[test]
    fn x_flips_zero() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply_pauli_string(&[0], Pauli::X).unwrap();
        assert_eq!(s.amplitudes()[1], C64::new(1.0, 0.0));
    }

    #[test]
    fn duplicate_sites_rejected() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(
            s.apply_pauli_string(&[1, 1], Pauli::Z),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(s.apply_cz(0, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn cz_negates_one_one() {
        let mut s = StateVector::basis(2, 3, DEFAULT_QUBIT_CAP).unwrap();
        s.apply_cz(0, 1).unwrap();
        assert_eq!(s.amplitudes()[3], C64::new(-1.0, 0.0));
        s.apply_cz(1, 0).unwrap();
        assert_eq!(s.amplitudes()[3], C64::new(1.0, 0.0));
    }

    #[test]
    fn bases_are_orthonormal() {
        for k in 0..40 {
            let theta = -3.0 + 0.17 * k as f64;
            for b in [
                MeasurementBasis::Z,
                MeasurementBasis::X,
                MeasurementBasis::ZRot(theta),
                MeasurementBasis::XRot(theta),
            ] {
                let v = b.vectors();
                for i in 0..2 {
                    for j in 0..2 {
                        let ip: C64 = (0..2).map(|c| v[i][c].conj() * v[j][c]).sum();
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((ip - C64::new(want, 0.0)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn zrot_zero_is_x() {
        let a = MeasurementBasis::ZRot(0.0).vectors();
        let b = MeasurementBasis::X.vectors();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - b[i][j]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn z_measure_plus_is_fair() {
        let p = plus().outcome_probabilities(0, MeasurementBasis::Z).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = plus();
        assert!(matches!(
            s.measure(0, MeasurementBasis::X, Some(1), &mut rng),
            Err(Error::ImpossibleOutcome { .. })
        ));
    }

    #[test]
    fn bell_pair_correlates() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::from_amplitudes(
            2,
            vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let mut s = bell.clone();
            let (a, _) = s.measure(0, MeasurementBasis::Z, None, &mut rng).unwrap();
            let (b, p) = s.measure(1, MeasurementBasis::Z, None, &mut rng).unwrap();
            assert_eq!(a, b);
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_out_matches_in_place() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let amps: Vec<C64> = (0..8).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let mut s = StateVector::from_amplitudes(3, amps).unwrap();
        s.normalize();
        let basis = MeasurementBasis::XRot(0.4);
        let (o, p, reduced) = s.measure_out(1, basis, Some(1), &mut rng).unwrap();
        let mut full = s.clone();
        let (o2, p2) = full.measure(1, basis, Some(1), &mut rng).unwrap();
        assert_eq!(o, o2);
        assert!((p - p2).abs() < 1e-12);
        assert_eq!(reduced.qubit_count(), 2);
        assert!((reduced.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_of_z() {
        let s = StateVector::zero(1).unwrap();
        assert!((s.expectation(&PauliTerm::z(vec![0])).unwrap() - 1.0).abs() < 1e-12);
        assert!(plus().expectation(&PauliTerm::z(vec![0])).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            StateVector::basis(30, 0, DEFAULT_QUBIT_CAP),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
