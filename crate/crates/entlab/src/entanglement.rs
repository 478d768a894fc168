//! States, partial traces, entanglement entropies, Haar sampling, and the
//! two closed-form reference curves: the exact mean entanglement entropy
//! of Haar-random states and the universal deficit curve for equal and
//! unequal bipartitions.

use crate::error::{Error, Result};
use crate::hamiltonian::{Bipartition, SubsystemSpec};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::stats::compensated_sum;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Unit-norm pure state.
#[derive(Debug, Clone)]
pub struct PureState {
    dim: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Wrap amplitudes, requiring unit norm within 1e-12.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("state", "zero-dimensional state"));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "state",
                format!("norm {norm} deviates from 1 beyond 1e-12"),
            ));
        }
        Ok(Self {
            dim: amplitudes.len(),
            amplitudes,
        })
    }

    /// Normalize and wrap; rejects the zero vector.
    pub fn from_unnormalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("state", "cannot normalize zero vector"));
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(Self {
            dim: amplitudes.len(),
            amplitudes,
        })
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { dim, amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }
}

/// How far a density matrix eigenvalue may dip below zero before it is an
/// upstream bug rather than rounding noise.
const EIGENVALUE_CLAMP: f64 = 1e-10;

/// Hermitian, positive-semidefinite, unit-trace operator on a named
/// subsystem.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    matrix: ComplexMatrix,
    label: String,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        matrix.require_hermitian()?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::invariant(
                "density matrix trace",
                (tr.re - 1.0).abs().max(tr.im.abs()),
                1e-10,
            ));
        }
        Ok(Self {
            dim: matrix.rows(),
            matrix,
            label: label.into(),
        })
    }

    pub fn maximally_mixed(dim: usize, label: impl Into<String>) -> Self {
        let w = 1.0 / dim as f64;
        Self {
            dim,
            matrix: ComplexMatrix::identity(dim).scaled(Complex64::new(w, 0.0)),
            label: label.into(),
        }
    }

    pub fn from_pure(state: &PureState, label: impl Into<String>) -> Self {
        let n = state.dim();
        let matrix = ComplexMatrix::from_fn(n, n, |r, c| {
            state.amplitudes[r] * state.amplitudes[c].conj()
        });
        Self {
            dim: n,
            matrix,
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Spectrum with the [-1e-10, 0] band clamped to zero; larger
    /// negativity signals an upstream bug and is rejected.
    pub fn clamped_eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = hermitian_eig(&self.matrix)?;
        let mut out = Vec::with_capacity(eig.eigenvalues.len());
        for &p in &eig.eigenvalues {
            if p < -EIGENVALUE_CLAMP {
                return Err(Error::invariant(
                    format!("negative eigenvalue of density matrix '{}'", self.label),
                    p,
                    -EIGENVALUE_CLAMP,
                ));
            }
            out.push(p.max(0.0));
        }
        Ok(out)
    }
}

/// Reduced density matrix of a pure state on a prepared bipartition.
/// Wrap-around subsystems are handled by the bipartition's site
/// permutation.
pub fn reduced_from_amplitudes(
    bip: &Bipartition,
    amplitudes: &[Complex64],
    label: impl Into<String>,
) -> DensityMatrix {
    let m = bip.reshape_state(amplitudes);
    let rho = m.mul(&m.adjoint());
    DensityMatrix {
        dim: bip.dim_a(),
        matrix: rho,
        label: label.into(),
    }
}

/// psi_A = tr_complement |psi><psi|.
pub fn partial_trace_pure(
    state: &PureState,
    n_sites: usize,
    local_dim: usize,
    a: SubsystemSpec,
) -> Result<DensityMatrix> {
    let bip = Bipartition::new(n_sites, local_dim, a)?;
    if state.dim() != bip.dim_a() * bip.dim_b() {
        return Err(Error::DimensionMismatch {
            context: "partial_trace state",
            expected: bip.dim_a() * bip.dim_b(),
            got: state.dim(),
        });
    }
    Ok(reduced_from_amplitudes(
        &bip,
        state.amplitudes(),
        subsystem_label(a),
    ))
}

/// rho_A = tr_complement rho for a full-system density matrix.
pub fn partial_trace_density(
    rho: &DensityMatrix,
    n_sites: usize,
    local_dim: usize,
    a: SubsystemSpec,
) -> Result<DensityMatrix> {
    let bip = Bipartition::new(n_sites, local_dim, a)?;
    let dim = bip.dim_a() * bip.dim_b();
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            context: "partial_trace density",
            expected: dim,
            got: rho.dim(),
        });
    }
    let da = bip.dim_a();
    let db = bip.dim_b();
    let mut out = ComplexMatrix::zeros(da, da);
    for a1 in 0..da {
        for a2 in a1..da {
            let mut acc = Complex64::new(0.0, 0.0);
            for b in 0..db {
                acc += rho.matrix().at(bip.full_index(a1, b), bip.full_index(a2, b));
            }
            out.set(a1, a2, acc);
            if a1 == a2 {
                out.set(a1, a1, Complex64::new(acc.re, 0.0));
            } else {
                out.set(a2, a1, acc.conj());
            }
        }
    }
    Ok(DensityMatrix {
        dim: da,
        matrix: out,
        label: subsystem_label(a),
    })
}

fn subsystem_label(a: SubsystemSpec) -> String {
    format!("A[start={},len={}]", a.start, a.length)
}

/// Von Neumann entropy -tr(rho ln rho) in nats, with 0 ln 0 = 0.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let ps = rho.clamped_eigenvalues()?;
    Ok(compensated_sum(ps.iter().map(|&p| {
        if p > 0.0 {
            -p * p.ln()
        } else {
            0.0
        }
    })))
}

/// Renyi entropy S_alpha = ln(tr rho^alpha) / (1 - alpha) in nats, for
/// alpha in (0,1) or (1,inf).
pub fn renyi_entropy(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha == 1.0 {
        return Err(Error::invalid(
            "alpha",
            format!("Renyi index must be positive and != 1, got {alpha}"),
        ));
    }
    let ps = rho.clamped_eigenvalues()?;
    let total = compensated_sum(ps.iter().map(|&p| p.powf(alpha)));
    Ok(total.ln() / (1.0 - alpha))
}

/// Entropy at index alpha; alpha = 1 selects the von Neumann entropy.
pub fn entropy_at(rho: &DensityMatrix, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        von_neumann_entropy(rho)
    } else {
        renyi_entropy(rho, alpha)
    }
}

/// Haar-random pure state: complex standard-normal vector normalized to
/// unit length (rotation invariance of the Gaussian makes this exact).
pub fn haar_state(dim: usize, seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_state_with_rng(dim, &mut rng)
}

pub fn haar_state_with_rng(dim: usize, rng: &mut impl Rng) -> Result<PureState> {
    if dim == 0 {
        return Err(Error::invalid("dim", "Haar state needs dim >= 1"));
    }
    let amplitudes: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    PureState::from_unnormalized(amplitudes)
}

/// Haar-random unitary via modified Gram-Schmidt on a complex Ginibre
/// matrix; the R factor's positive diagonal makes the distribution exact.
pub fn haar_unitary_with_rng(n: usize, rng: &mut impl Rng) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::invalid("dim", "Haar unitary needs dim >= 1"));
    }
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im)
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        // Two orthogonalization passes keep loss of orthogonality at
        // rounding level.
        for _ in 0..2 {
            for j in 0..k {
                let proj: Complex64 = cols[j]
                    .iter()
                    .zip(&cols[k])
                    .map(|(q, v)| q.conj() * v)
                    .sum();
                let (qj, vk) = {
                    let (a, b) = cols.split_at_mut(k);
                    (&a[j], &mut b[0])
                };
                for (v, q) in vk.iter_mut().zip(qj) {
                    *v -= proj * q;
                }
            }
        }
        let norm = cols[k].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::invalid(
                "rng",
                "Ginibre column collapsed during orthogonalization",
            ));
        }
        for v in &mut cols[k] {
            *v /= norm;
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |r, c| cols[c][r]))
}

/// Exact mean entanglement entropy of a Haar-random pure state across a
/// d_a x d_abar bipartition, plus the leading asymptotic form
/// ln d_a - d_a / (2 d_abar) for comparison.
#[derive(Debug, Clone, Copy)]
pub struct PageMean {
    pub exact: f64,
    pub asymptotic: f64,
}

/// Finite-sum evaluation of the mean: sum_{k=d_abar+1}^{d_a d_abar} 1/k
/// - (d_a - 1)/(2 d_abar). Requires d_a <= d_abar; swap the arguments for
/// the larger-subsystem case.
pub fn page_mean(d_a: usize, d_abar: usize) -> Result<PageMean> {
    if d_a == 0 || d_abar == 0 {
        return Err(Error::invalid("dims", "Page mean needs nonzero dimensions"));
    }
    if d_a > d_abar {
        return Err(Error::invalid(
            "dims",
            format!("d_a = {d_a} exceeds d_abar = {d_abar}; swap the arguments"),
        ));
    }
    let total = d_a
        .checked_mul(d_abar)
        .ok_or_else(|| Error::invalid("dims", "d_a * d_abar overflows"))?;
    let tail = compensated_sum((d_abar + 1..=total).map(|k| 1.0 / k as f64));
    let exact = tail - (d_a as f64 - 1.0) / (2.0 * d_abar as f64);
    let asymptotic = (d_a as f64).ln() - d_a as f64 / (2.0 * d_abar as f64);
    Ok(PageMean { exact, asymptotic })
}

/// Universal deficit curve at subsystem fraction f = subsystem_len / n_sites:
/// (delta_{f,1/2} - f - ln(1 - f)) / 2, in nats. The Kronecker delta fires
/// on the exact integer condition 2 * subsystem_len == n_sites. Stated for
/// local dimension 2 only; no extrapolation to d > 2 is attempted here.
pub fn conjecture_gap(subsystem_len: usize, n_sites: usize) -> Result<f64> {
    if subsystem_len == 0 || 2 * subsystem_len > n_sites {
        return Err(Error::invalid(
            "subsystem_len",
            format!(
                "fraction {}/{} outside (0, 1/2]",
                subsystem_len, n_sites
            ),
        ));
    }
    let f = subsystem_len as f64 / n_sites as f64;
    let delta = if 2 * subsystem_len == n_sites { 1.0 } else { 0.0 };
    Ok((delta - f - (1.0 - f).ln()) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::task_rng;
    use crate::stats::{mean, sample_variance};

    const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn bell_pair() -> PureState {
        PureState::new(vec![
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
        ])
        .unwrap()
    }

    /// Brute-force partial trace by direct index summation, the oracle the
    /// fast reshape-based implementation is checked against.
    fn partial_trace_oracle(
        state: &PureState,
        n_sites: usize,
        d: usize,
        a: SubsystemSpec,
    ) -> ComplexMatrix {
        let a_sites = a.sites(n_sites);
        let digit = |x: usize, site: usize| (x / d.pow((n_sites - 1 - site) as u32)) % d;
        let sub_index = |x: usize| -> usize {
            a_sites.iter().fold(0, |acc, &s| acc * d + digit(x, s))
        };
        let da = a.dim_a(d);
        let dim = state.dim();
        let mut rho = ComplexMatrix::zeros(da, da);
        for x in 0..dim {
            for y in 0..dim {
                // Contributes when all complement digits agree.
                let same_env = (0..n_sites)
                    .filter(|s| !a_sites.contains(s))
                    .all(|s| digit(x, s) == digit(y, s));
                if same_env {
                    let v = state.amplitudes()[x] * state.amplitudes()[y].conj();
                    rho.add_at(sub_index(x), sub_index(y), v);
                }
            }
        }
        rho
    }

    #[test]
    fn bell_pair_traces_to_maximally_mixed() {
        let rho = partial_trace_pure(&bell_pair(), 2, 2, SubsystemSpec::new(0, 1)).unwrap();
        assert!((rho.matrix().at(0, 0).re - 0.5).abs() < 1e-14);
        assert!((rho.matrix().at(1, 1).re - 0.5).abs() < 1e-14);
        assert!(rho.matrix().at(0, 1).norm() < 1e-14);
        assert!((von_neumann_entropy(&rho).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn product_state_traces_to_projector() {
        let product = PureState::basis_state(4, 0); // |0> (x) |0>
        let rho = partial_trace_pure(&product, 2, 2, SubsystemSpec::new(1, 1)).unwrap();
        assert!((rho.matrix().at(0, 0).re - 1.0).abs() < 1e-14);
        assert!(rho.matrix().at(1, 1).norm() < 1e-14);
        assert!(von_neumann_entropy(&rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ghz_reduction_matches_index_summation_oracle() {
        let mut amp = vec![Complex64::new(0.0, 0.0); 8];
        amp[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amp[7] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let ghz = PureState::new(amp).unwrap();
        let a = SubsystemSpec::new(0, 2);
        let rho = partial_trace_pure(&ghz, 3, 2, a).unwrap();
        // (|00><00| + |11><11|)/2.
        assert!((rho.matrix().at(0, 0).re - 0.5).abs() < 1e-14);
        assert!((rho.matrix().at(3, 3).re - 0.5).abs() < 1e-14);
        assert!(rho.matrix().at(0, 3).norm() < 1e-14);
        let oracle = partial_trace_oracle(&ghz, 3, 2, a);
        assert!(rho.matrix().sub(&oracle).max_abs() < 1e-14);
    }

    #[test]
    fn wrapped_subsystem_matches_oracle() {
        let mut rng = task_rng(5, "wrap-state", 0);
        let state = haar_state_with_rng(32, &mut rng).unwrap();
        // A = sites {3, 4, 0} wraps around the ring of 5 sites.
        let a = SubsystemSpec::new(3, 3);
        let rho = partial_trace_pure(&state, 5, 2, a).unwrap();
        let oracle = partial_trace_oracle(&state, 5, 2, a);
        assert!(rho.matrix().sub(&oracle).max_abs() < 1e-12);
    }

    #[test]
    fn schmidt_symmetry_of_pure_states() {
        let mut rng = task_rng(6, "schmidt", 0);
        let state = haar_state_with_rng(64, &mut rng).unwrap();
        for len in 1..6 {
            let sa = von_neumann_entropy(
                &partial_trace_pure(&state, 6, 2, SubsystemSpec::new(0, len)).unwrap(),
            )
            .unwrap();
            let sb = von_neumann_entropy(
                &partial_trace_pure(&state, 6, 2, SubsystemSpec::new(len, 6 - len)).unwrap(),
            )
            .unwrap();
            assert!((sa - sb).abs() < 1e-9, "L={len}: {sa} vs {sb}");
        }
    }

    #[test]
    fn partial_trace_density_agrees_with_pure_path() {
        let mut rng = task_rng(7, "density", 0);
        let state = haar_state_with_rng(16, &mut rng).unwrap();
        let rho_full = DensityMatrix::from_pure(&state, "full");
        let a = SubsystemSpec::new(1, 2);
        let via_density = partial_trace_density(&rho_full, 4, 2, a).unwrap();
        let via_pure = partial_trace_pure(&state, 4, 2, a).unwrap();
        assert!(via_density.matrix().sub(via_pure.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn entropy_scalar_values() {
        let rho = DensityMatrix::new(
            ComplexMatrix::from_real(2, 2, &[0.75, 0.0, 0.0, 0.25]),
            "diag",
        )
        .unwrap();
        // -sum p ln p evaluated by hand.
        assert!((von_neumann_entropy(&rho).unwrap() - 0.5623351446188083).abs() < 1e-12);
        // tr rho^2 = 5/8.
        assert!((renyi_entropy(&rho, 2.0).unwrap() - (8.0f64 / 5.0).ln()).abs() < 1e-12);

        let flat = DensityMatrix::maximally_mixed(2, "flat");
        assert!((renyi_entropy(&flat, 2.0).unwrap() - 2f64.ln()).abs() < 1e-12);
        assert!((von_neumann_entropy(&flat).unwrap() - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn renyi_ordering_and_limit_to_von_neumann() {
        let mut rng = task_rng(8, "renyi", 0);
        let state = haar_state_with_rng(64, &mut rng).unwrap();
        let rho = partial_trace_pure(&state, 6, 2, SubsystemSpec::new(0, 3)).unwrap();
        let s05 = renyi_entropy(&rho, 0.5).unwrap();
        let s15 = renyi_entropy(&rho, 1.5).unwrap();
        let s2 = renyi_entropy(&rho, 2.0).unwrap();
        let s1 = von_neumann_entropy(&rho).unwrap();
        assert!(s2 <= s15 + 1e-12 && s15 <= s05 + 1e-12);
        assert!(s2 <= s1 + 1e-12 && s1 <= s05 + 1e-12);

        // alpha -> 1 limit brackets the von Neumann value.
        let above = renyi_entropy(&rho, 1.0 + 1e-4).unwrap();
        let below = renyi_entropy(&rho, 1.0 - 1e-4).unwrap();
        assert!((above - s1).abs() < 1e-3 && (below - s1).abs() < 1e-3);
        assert!(above <= s1 + 1e-12 && s1 <= below + 1e-12);
    }

    #[test]
    fn renyi_rejects_bad_alpha() {
        let flat = DensityMatrix::maximally_mixed(2, "flat");
        assert!(renyi_entropy(&flat, 1.0).is_err());
        assert!(renyi_entropy(&flat, 0.0).is_err());
        assert!(renyi_entropy(&flat, -1.0).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        // Trace != 1 rejected.
        assert!(DensityMatrix::new(ComplexMatrix::identity(2), "bad").is_err());
        // Too-negative eigenvalue rejected at entropy time.
        let m = ComplexMatrix::from_real(2, 2, &[1.001, 0.0, 0.0, -0.001]);
        let rho = DensityMatrix {
            dim: 2,
            matrix: m,
            label: "forced".into(),
        };
        assert!(matches!(
            von_neumann_entropy(&rho),
            Err(Error::InvariantViolation { .. })
        ));
    }

    #[test]
    fn haar_state_basics() {
        let one = haar_state(1, 3).unwrap();
        assert!((one.amplitudes()[0].norm() - 1.0).abs() < 1e-12);

        let a = haar_state(16, 99).unwrap();
        let b = haar_state(16, 99).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());

        assert!(haar_state(0, 1).is_err());
    }

    #[test]
    fn haar_marginal_moment() {
        // E |amplitude_0|^2 = 1/dim; Beta(1, dim-1) variance gives the
        // standard error.
        let dim = 8;
        let n = 100_000;
        let mut rng = task_rng(123, "haar-moment", 0);
        let mut acc = 0.0;
        for _ in 0..n {
            let s = haar_state_with_rng(dim, &mut rng).unwrap();
            acc += s.amplitudes()[0].norm_sqr();
        }
        let got = acc / n as f64;
        let mu = 1.0 / dim as f64;
        let var = mu * mu * (dim as f64 - 1.0) / (dim as f64 / 2.0 + 1.0) / 2.0;
        let se = (var / n as f64).sqrt();
        assert!(
            (got - mu).abs() < 3.0 * se.max(1e-5),
            "got {got}, want {mu} +- {se}"
        );
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = task_rng(11, "haar-u", 0);
        let u = haar_unitary_with_rng(24, &mut rng).unwrap();
        let dev = u.adjoint().mul(&u).sub(&ComplexMatrix::identity(24)).max_abs();
        assert!(dev < 1e-12, "unitarity deviation {dev:.3e}");
    }

    #[test]
    fn page_mean_exact_values() {
        // d_a = 1: empty tail minus zero.
        assert!(page_mean(1, 8).unwrap().exact.abs() < 1e-15);
        // d_a = d_abar = 2: 1/3 + 1/4 - 1/4 = 1/3.
        assert!((page_mean(2, 2).unwrap().exact - 1.0 / 3.0).abs() < 1e-14);
        // d_a = 2, d_abar = 4: 1/5 + 1/6 + 1/7.
        let expect = 1.0 / 5.0 + 1.0 / 6.0 + 1.0 / 7.0;
        assert!((page_mean(2, 4).unwrap().exact - expect).abs() < 1e-14);

        assert!(page_mean(0, 4).is_err());
        assert!(page_mean(4, 2).is_err());
    }

    #[test]
    fn page_asymptotic_error_shrinks_with_dimension() {
        // |exact - asymptotic| = O(1)/(d_a d_abar).
        let mut last = f64::INFINITY;
        for n in [3usize, 4, 5, 6, 7] {
            let da = 1 << (n / 2);
            let dab = 1 << (n - n / 2);
            let pm = page_mean(da, dab).unwrap();
            let err = (pm.exact - pm.asymptotic).abs();
            assert!(err <= 2.0 / (da * dab) as f64, "err {err} too large at n={n}");
            assert!(err < last + 1e-12);
            last = err;
        }
    }

    #[test]
    fn monte_carlo_page_mean_small_case() {
        // 10^4 Haar states on a 2x2 bipartition vs the exact mean.
        let pm = page_mean(2, 2).unwrap().exact;
        let n = 10_000;
        let entropies: Vec<f64> = (0..n)
            .map(|i| {
                let mut rng = task_rng(2024, "page-mc", i as u64);
                let s = haar_state_with_rng(4, &mut rng).unwrap();
                let rho = partial_trace_pure(&s, 2, 2, SubsystemSpec::new(0, 1)).unwrap();
                von_neumann_entropy(&rho).unwrap()
            })
            .collect();
        let m = mean(&entropies);
        let se = (sample_variance(&entropies) / n as f64).sqrt();
        assert!(
            (m - pm).abs() <= 3.0 * se,
            "Monte-Carlo mean {m} vs Page {pm} (se {se})"
        );
    }

    #[test]
    fn page_concentration_improves_with_total_dimension() {
        // Sample variance of S over Haar states at f = 1/2 drops as the
        // total dimension grows: 2^6 -> 2^8 -> 2^10.
        let mut variances = Vec::new();
        for (n_sites, samples) in [(6usize, 200), (8, 200), (10, 200)] {
            let dim = 1 << n_sites;
            let a = SubsystemSpec::new(0, n_sites / 2);
            let es: Vec<f64> = (0..samples)
                .map(|i| {
                    let mut rng = task_rng(31, "page-conc", (n_sites * 1000 + i) as u64);
                    let s = haar_state_with_rng(dim, &mut rng).unwrap();
                    let rho = partial_trace_pure(&s, n_sites, 2, a).unwrap();
                    von_neumann_entropy(&rho).unwrap()
                })
                .collect();
            variances.push(sample_variance(&es));
        }
        assert!(
            variances[0] > variances[1] && variances[1] > variances[2],
            "variances not decreasing: {variances:?}"
        );
    }

    #[test]
    fn conjecture_gap_values() {
        // f -> 0+.
        assert!(conjecture_gap(1, 1_000_000).unwrap() < 1e-6);
        // f = 1/2: (1 - 1/2 + ln 2)/2.
        let half = conjecture_gap(3, 6).unwrap();
        assert!((half - 0.5965735902799727).abs() < 1e-12);
        // f = 1/4: (-1/4 - ln(3/4))/2.
        let quarter = conjecture_gap(1, 4).unwrap();
        assert!((quarter - 0.018841036225890424).abs() < 1e-12);
        // The delta fires on the exact integer condition only.
        assert!(conjecture_gap(2, 4).unwrap() > 0.5);
        assert!(conjecture_gap(499_999, 1_000_000).unwrap() < 0.1);

        assert!(conjecture_gap(0, 4).is_err());
        assert!(conjecture_gap(3, 4).is_err());
    }
}
