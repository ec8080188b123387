//! Brownian increments on a nested grid, truncation and the Ω^n probe
//!
//! A lattice covers `[0, T]` with `nT` coarse cells, each split into `m` fine
//! cells. Draws come from a counter-based generator keyed by
//! `(seed, motion tag, path id)`, so a path is reproducible in isolation and
//! independent of how paths are spread over threads.

use std::io::{self, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Upper bound on the number of fine cells in one lattice.
pub const MAX_FINE_CELLS: u64 = 1 << 31;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("lattice with {0} fine cells exceeds the limit of {MAX_FINE_CELLS}")]
    TooLarge(u64),
    #[error("empty ensemble")]
    EmptyEnsemble,
    #[error("resolution {resolution} is not compatible with a lattice of {cells} fine cells per unit time")]
    Incompatible { resolution: u64, cells: u64 },
    #[error("malformed lattice dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Independent driving motions; each gets its own key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum MotionTag {
    W = 0,
    B = 1,
    Auxiliary = 2,
}

/// Generator for one `(seed, path, motion)` triple.
pub fn motion_rng(seed: u64, path_id: u64, tag: MotionTag) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(tag as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(path_id);
    rng
}

fn fill_increments(rng: &mut ChaCha8Rng, sd: f64, out: &mut [f64]) {
    for v in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = sd * z;
    }
}

/// Fine increments of `W` (and optionally of an independent `B`) for one path.
#[derive(Clone, Debug, PartialEq)]
pub struct BrownianLattice {
    horizon: u64,
    n: u64,
    m: u64,
    seed: u64,
    path_id: u64,
    dw: Vec<f64>,
    db: Option<Vec<f64>>,
}

fn check_shape(n: u64, m: u64, horizon: u64) -> Result<u64, NoiseError> {
    if n == 0 || m == 0 || horizon == 0 {
        return Err(NoiseError::InvalidParameter(format!("n, m and T must be positive (n={n}, m={m}, T={horizon})")));
    }
    let cells = n.checked_mul(m).and_then(|x| x.checked_mul(horizon)).ok_or(NoiseError::TooLarge(u64::MAX))?;
    if cells > MAX_FINE_CELLS {
        return Err(NoiseError::TooLarge(cells));
    }
    Ok(cells)
}

impl BrownianLattice {
    /// Samples `W` on `[0, horizon]` with `n` coarse cells per unit time and `m`
    /// fine cells per coarse cell.
    pub fn sample(n: u64, m: u64, horizon: u64, seed: u64, path_id: u64) -> Result<Self, NoiseError> {
        let cells = check_shape(n, m, horizon)?;
        let mut lat = Self { horizon, n, m, seed, path_id, dw: vec![0.0; cells as usize], db: None };
        lat.resample(path_id);
        Ok(lat)
    }

    /// Like [`BrownianLattice::sample`], also drawing the auxiliary motion `B`.
    pub fn sample_with_auxiliary(n: u64, m: u64, horizon: u64, seed: u64, path_id: u64) -> Result<Self, NoiseError> {
        let cells = check_shape(n, m, horizon)?;
        let mut lat =
            Self { horizon, n, m, seed, path_id, dw: vec![0.0; cells as usize], db: Some(vec![0.0; cells as usize]) };
        lat.resample(path_id);
        Ok(lat)
    }

    /// Wraps given fine increments (used for scripted noise in tests and for
    /// rebuilding a lattice from coarse sums).
    pub fn from_increments(
        n: u64,
        m: u64,
        horizon: u64,
        dw: Vec<f64>,
        db: Option<Vec<f64>>,
    ) -> Result<Self, NoiseError> {
        let cells = check_shape(n, m, horizon)?;
        if dw.len() as u64 != cells || db.as_ref().is_some_and(|b| b.len() as u64 != cells) {
            return Err(NoiseError::InvalidParameter(format!("expected {cells} fine increments")));
        }
        Ok(Self { horizon, n, m, seed: 0, path_id: 0, dw, db })
    }

    /// Redraws the increments for another path, reusing the buffers.
    pub fn resample(&mut self, path_id: u64) {
        self.path_id = path_id;
        let sd = self.fine_step().sqrt();
        let mut rng = motion_rng(self.seed, path_id, MotionTag::W);
        fill_increments(&mut rng, sd, &mut self.dw);
        if let Some(db) = self.db.as_mut() {
            let mut rng = motion_rng(self.seed, path_id, MotionTag::B);
            fill_increments(&mut rng, sd, db);
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn m(&self) -> u64 {
        self.m
    }
    pub fn horizon(&self) -> u64 {
        self.horizon
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn path_id(&self) -> u64 {
        self.path_id
    }
    pub fn coarse_step(&self) -> f64 {
        1.0 / self.n as f64
    }
    pub fn fine_step(&self) -> f64 {
        1.0 / (self.n * self.m) as f64
    }
    pub fn coarse_len(&self) -> usize {
        (self.n * self.horizon) as usize
    }
    pub fn dw_fine(&self) -> &[f64] {
        &self.dw
    }
    pub fn db_fine(&self) -> Option<&[f64]> {
        self.db.as_deref()
    }

    /// Coarse increments; each is the in-order sum of its `m` fine increments.
    pub fn coarse_increments(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.coarse_len()];
        self.coarse_increments_into(&mut out);
        out
    }

    pub fn coarse_increments_into(&self, out: &mut [f64]) {
        for (o, cell) in out.iter_mut().zip(self.dw.chunks_exact(self.m as usize)) {
            *o = cell.iter().sum();
        }
    }

    /// Increments on a grid with `resolution` cells per unit time, which must
    /// divide `n m`.
    pub fn increments_at(&self, resolution: u64) -> Result<Vec<f64>, NoiseError> {
        let per_unit = self.n * self.m;
        if resolution == 0 || per_unit % resolution != 0 {
            return Err(NoiseError::Incompatible { resolution, cells: per_unit });
        }
        let k = (per_unit / resolution) as usize;
        Ok(self.dw.chunks_exact(k).map(|c| c.iter().sum()).collect())
    }

    /// `W` at every fine node, starting from `W_0 = 0`.
    pub fn w_path(&self) -> Vec<f64> {
        cumulative(&self.dw)
    }

    pub fn b_path(&self) -> Option<Vec<f64>> {
        self.db.as_deref().map(cumulative)
    }

    /// Largest range of `W` over the fine nodes of a coarse cell.
    pub fn max_cell_oscillation(&self) -> f64 {
        let mut w = 0.0;
        let mut worst: f64 = 0.0;
        for cell in self.dw.chunks_exact(self.m as usize) {
            let (mut lo, mut hi) = (w, w);
            for dw in cell {
                w += dw;
                lo = f64::min(lo, w);
                hi = f64::max(hi, w);
            }
            worst = worst.max(hi - lo);
        }
        worst
    }

    /// Binary dump: little-endian `u64` header `T, n, m, seed, path_id`, then
    /// the fine increments of `W` (and of `B` if present) as `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), NoiseError> {
        for v in [self.horizon, self.n, self.m, self.seed, self.path_id] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in self.dw.iter().chain(self.db.iter().flatten()) {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, NoiseError> {
        let mut header = [0u64; 5];
        let mut buf = [0u8; 8];
        for h in header.iter_mut() {
            r.read_exact(&mut buf)?;
            *h = u64::from_le_bytes(buf);
        }
        let [horizon, n, m, seed, path_id] = header;
        let cells = check_shape(n, m, horizon)? as usize;
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if rest.len() % 8 != 0 {
            return Err(NoiseError::Format("trailing bytes".into()));
        }
        let values: Vec<f64> = rest.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        let db = match values.len() {
            l if l == cells => None,
            l if l == 2 * cells => Some(values[cells..].to_vec()),
            l => return Err(NoiseError::Format(format!("expected {cells} or {} increments, found {l}", 2 * cells))),
        };
        let dw = values[..cells].to_vec();
        Ok(Self { horizon, n, m, seed, path_id, dw, db })
    }
}

fn cumulative(inc: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(inc.len() + 1);
    let mut s = 0.0;
    out.push(s);
    for v in inc {
        s += v;
        out.push(s);
    }
    out
}

/// Clamp of normalized increments at `A_n = √(2ρ ln n)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    pub rho: f64,
    pub enabled: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { rho: 2.5, enabled: true }
    }
}

impl TruncationPolicy {
    pub fn new(rho: f64) -> Result<Self, NoiseError> {
        if !(rho.is_finite() && rho > 2.0) {
            return Err(NoiseError::InvalidParameter(format!("rho must exceed 2, got {rho}")));
        }
        Ok(Self { rho, enabled: true })
    }

    pub fn disabled() -> Self {
        Self { enabled: false, ..Self::default() }
    }

    pub fn clamp_level(&self, n: u64) -> f64 {
        (2.0 * self.rho * (n as f64).ln()).sqrt()
    }

    /// Truncated increment and whether it was clamped. Unclamped increments are
    /// returned bit-for-bit.
    #[inline]
    pub fn apply(&self, dw: f64, n: u64) -> (f64, bool) {
        if !self.enabled {
            return (dw, false);
        }
        let sqrt_n = (n as f64).sqrt();
        let level = self.clamp_level(n);
        if (dw * sqrt_n).abs() > level {
            (level.copysign(dw) / sqrt_n, true)
        } else {
            (dw, false)
        }
    }
}

/// Truncates coarse increments of step `1/n`; returns the increments and the
/// number of clamps.
pub fn truncate(coarse: &[f64], policy: &TruncationPolicy, n: u64) -> Result<(Vec<f64>, usize), NoiseError> {
    if n < 2 && policy.enabled {
        return Err(NoiseError::InvalidParameter(format!("truncation needs n >= 2, got {n}")));
    }
    let mut clamps = 0;
    let out = coarse
        .iter()
        .map(|&dw| {
            let (v, c) = policy.apply(dw, n);
            clamps += c as usize;
            v
        })
        .collect();
    Ok((out, clamps))
}

/// Probe of the event Ω^n: every coarse cell's oscillation stays below
/// `n^{-(1/2 - ε)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaProbe {
    pub epsilon: f64,
}

impl Default for OmegaProbe {
    fn default() -> Self {
        Self { epsilon: 0.1 }
    }
}

impl OmegaProbe {
    pub fn new(epsilon: f64) -> Result<Self, NoiseError> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(NoiseError::InvalidParameter(format!("epsilon must lie in (0, 1/2), got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    pub fn threshold(&self, n: u64) -> f64 {
        (n as f64).powf(-(0.5 - self.epsilon))
    }
}

/// Fraction of lattices on which Ω^n fails.
pub fn omega_complement_frequency(lattices: &[BrownianLattice], probe: &OmegaProbe) -> Result<f64, NoiseError> {
    let n = lattices.first().ok_or(NoiseError::EmptyEnsemble)?.n;
    omega_complement_frequency_at(lattices, probe.threshold(n))
}

/// Same as [`omega_complement_frequency`] with an explicit threshold.
pub fn omega_complement_frequency_at(lattices: &[BrownianLattice], threshold: f64) -> Result<f64, NoiseError> {
    if lattices.is_empty() {
        return Err(NoiseError::EmptyEnsemble);
    }
    let fails = lattices.iter().filter(|l| !(l.max_cell_oscillation() < threshold)).count();
    Ok(fails as f64 / lattices.len() as f64)
}

/// `2Φ(-x)`, the probability that a standard normal exceeds `x` in modulus.
pub fn two_sided_tail(x: f64) -> f64 {
    libm::erfc(x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarse_sums_match_fine_increments() {
        let lat = BrownianLattice::sample(4, 8, 2, 7, 3).unwrap();
        let coarse = lat.coarse_increments();
        assert_eq!(coarse.len(), 8);
        let total: f64 = lat.dw_fine().iter().sum();
        assert!((coarse.iter().sum::<f64>() - total).abs() < 1e-14);
    }

    #[test]
    fn paths_are_reproducible_and_distinct() {
        let a = BrownianLattice::sample(10, 2, 1, 1, 5).unwrap();
        let b = BrownianLattice::sample(10, 2, 1, 1, 5).unwrap();
        let c = BrownianLattice::sample(10, 2, 1, 1, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.dw_fine(), c.dw_fine());
    }

    #[test]
    fn w_and_b_use_different_streams() {
        let lat = BrownianLattice::sample_with_auxiliary(10, 1, 1, 1, 0).unwrap();
        assert_ne!(lat.dw_fine(), lat.db_fine().unwrap());
    }

    #[test]
    fn longer_horizon_extends_prefix() {
        let a = BrownianLattice::sample(10, 2, 1, 9, 4).unwrap();
        let b = BrownianLattice::sample(10, 2, 3, 9, 4).unwrap();
        assert_eq!(a.dw_fine(), &b.dw_fine()[..20]);
    }

    #[test]
    fn invalid_shapes() {
        assert!(BrownianLattice::sample(0, 1, 1, 0, 0).is_err());
        assert!(matches!(BrownianLattice::sample(1 << 20, 1 << 12, 1, 0, 0), Err(NoiseError::TooLarge(_))));
    }

    #[test]
    fn clamp_level_at_100() {
        let p = TruncationPolicy::default();
        assert!((p.clamp_level(100) - 4.7985).abs() < 1e-4);
    }

    #[test]
    fn truncation_example() {
        let p = TruncationPolicy::default();
        let (out, clamps) = truncate(&[0.6, 0.01], &p, 100).unwrap();
        assert_eq!(clamps, 1);
        assert!((out[0] - 0.47985).abs() < 1e-5);
        assert_eq!(out[1], 0.01);
        assert!(TruncationPolicy::new(2.0).is_err());
        assert!(truncate(&[0.1], &p, 1).is_err());
    }

    #[test]
    fn omega_thresholds() {
        let lats: Vec<_> = (0..5).map(|i| BrownianLattice::sample(10, 4, 1, 2, i).unwrap()).collect();
        assert_eq!(omega_complement_frequency_at(&lats, f64::INFINITY).unwrap(), 0.0);
        assert_eq!(omega_complement_frequency_at(&lats, 0.0).unwrap(), 1.0);
        assert!(omega_complement_frequency(&[], &OmegaProbe::default()).is_err());
    }

    #[test]
    fn dump_round_trip() {
        for lat in [
            BrownianLattice::sample(5, 3, 2, 11, 1).unwrap(),
            BrownianLattice::sample_with_auxiliary(5, 3, 2, 11, 1).unwrap(),
        ] {
            let mut buf = Vec::new();
            lat.write_to(&mut buf).unwrap();
            assert_eq!(buf.len(), 40 + 8 * lat.dw_fine().len() * if lat.db_fine().is_some() { 2 } else { 1 });
            assert_eq!(BrownianLattice::read_from(&buf[..]).unwrap(), lat);
        }
    }

    #[test]
    fn tail_probability() {
        assert!((two_sided_tail(1.959963984540054) - 0.05).abs() < 1e-12);
    }
}
