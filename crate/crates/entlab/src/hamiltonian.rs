//! Local spin-chain Hamiltonians in canonical form.
//!
//! A chain of N spins with local dimension d carries one two-site term per
//! bond: term i acts on sites (i, i+1), wrapping on periodic chains. The
//! canonical form enforces two conventions: every term is traceless, and
//! no term carries a component acting only on its left site (such
//! components belong to the previous bond). Together these make distinct
//! terms Hilbert-Schmidt orthogonal, tr(H_i H_i') = 0 for i != i', which
//! is what the variance bookkeeping in this module relies on.

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix};
use crate::seed::task_rng;
use crate::stats::compensated_sum;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt;
use std::path::{Path, PathBuf};

pub const MFIM_DEFAULT_COUPLING: f64 = 1.0;
pub const MFIM_DEFAULT_TRANSVERSE: f64 = 0.9045;
pub const MFIM_DEFAULT_LONGITUDINAL: f64 = 0.8090;

/// Frobenius-norm band each gue-local term is rescaled into.
pub const GUE_NORM_BAND: (f64, f64) = (0.5, 2.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Periodic => write!(f, "periodic"),
            Boundary::Open => write!(f, "open"),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "open" => Ok(Boundary::Open),
            other => Err(Error::invalid(
                "boundary",
                format!("expected 'periodic' or 'open', got '{other}'"),
            )),
        }
    }
}

/// Contiguous subsystem of `length` sites starting at `start` (ring order,
/// wrapping past the last site).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubsystemSpec {
    pub start: usize,
    pub length: usize,
}

impl SubsystemSpec {
    pub fn new(start: usize, length: usize) -> Self {
        Self { start, length }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.length == 0 || self.length > n_sites {
            return Err(Error::invalid(
                "subsystem",
                format!(
                    "length {} invalid for a chain of {} sites",
                    self.length, n_sites
                ),
            ));
        }
        if self.start >= n_sites {
            return Err(Error::invalid(
                "subsystem",
                format!("start {} out of range for {} sites", self.start, n_sites),
            ));
        }
        Ok(())
    }

    /// Sites of the subsystem in ring order.
    pub fn sites(&self, n_sites: usize) -> Vec<usize> {
        (0..self.length)
            .map(|k| (self.start + k) % n_sites)
            .collect()
    }

    pub fn dim_a(&self, local_dim: usize) -> usize {
        local_dim.pow(self.length as u32)
    }

    pub fn dim_abar(&self, local_dim: usize, n_sites: usize) -> usize {
        local_dim.pow((n_sites - self.length) as u32)
    }
}

/// All N contiguous length-L windows on the ring, one starting at each
/// site. Open chains use the same window set; a window only collects
/// bonds that exist, so per-bond counting identities still hold.
pub fn ring_windows(n_sites: usize, length: usize) -> Vec<SubsystemSpec> {
    (0..n_sites)
        .map(|start| SubsystemSpec::new(start, length))
        .collect()
}

/// Index bookkeeping for a bipartition A / complement. Site k of the full
/// chain carries weight d^(N-1-k) in the basis index; the tables below
/// scatter subsystem digits back into full indices.
pub struct Bipartition {
    pub n_sites: usize,
    pub local_dim: usize,
    pub spec: SubsystemSpec,
    dim_a: usize,
    dim_b: usize,
    a_contrib: Vec<usize>,
    b_contrib: Vec<usize>,
}

impl Bipartition {
    pub fn new(n_sites: usize, local_dim: usize, spec: SubsystemSpec) -> Result<Self> {
        spec.validate(n_sites)?;
        let a_sites = spec.sites(n_sites);
        // Complement in ring order, continuing from the window's end.
        let b_sites: Vec<usize> = (spec.length..n_sites)
            .map(|k| (spec.start + k) % n_sites)
            .collect();
        let dim_a = spec.dim_a(local_dim);
        let dim_b = spec.dim_abar(local_dim, n_sites);
        Ok(Self {
            n_sites,
            local_dim,
            spec,
            dim_a,
            dim_b,
            a_contrib: contrib_table(&a_sites, n_sites, local_dim),
            b_contrib: contrib_table(&b_sites, n_sites, local_dim),
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    #[inline]
    pub fn full_index(&self, a: usize, b: usize) -> usize {
        self.a_contrib[a] + self.b_contrib[b]
    }

    /// Reshape a full-system state vector into the d_A x d_B coefficient
    /// matrix M[a][b] = psi[full_index(a, b)].
    pub fn reshape_state(&self, amplitudes: &[Complex64]) -> ComplexMatrix {
        debug_assert_eq!(amplitudes.len(), self.dim_a * self.dim_b);
        let mut m = ComplexMatrix::zeros(self.dim_a, self.dim_b);
        for a in 0..self.dim_a {
            let base = self.a_contrib[a];
            for b in 0..self.dim_b {
                m.set(a, b, amplitudes[base + self.b_contrib[b]]);
            }
        }
        m
    }
}

/// Full-index contribution of each subsystem digit pattern. Digit 0 of a
/// subsystem index is its first site (most significant).
fn contrib_table(sites: &[usize], n_sites: usize, d: usize) -> Vec<usize> {
    let len = sites.len();
    let dim: usize = d.pow(len as u32);
    let weights: Vec<usize> = sites
        .iter()
        .map(|&s| d.pow((n_sites - 1 - s) as u32))
        .collect();
    let mut table = vec![0usize; dim];
    for (idx, slot) in table.iter_mut().enumerate() {
        let mut rest = idx;
        let mut acc = 0usize;
        for k in (0..len).rev() {
            acc += (rest % d) * weights[k];
            rest /= d;
        }
        *slot = acc;
    }
    table
}

/// Canonicalized nearest-neighbor Hamiltonian H = sum_i H_i.
#[derive(Debug, Clone)]
pub struct LocalHamiltonian {
    n_sites: usize,
    local_dim: usize,
    boundary: Boundary,
    /// terms[i] acts on sites (i, i+1 mod N); length N (periodic) or N-1 (open).
    terms: Vec<ComplexMatrix>,
    /// Scalar multiple of the identity removed by the tracelessness
    /// convention: H_raw = H_canonical + removed_trace * I.
    removed_trace: f64,
    /// Open chains only: bond 0 keeps single-site components of site 0
    /// because there is no previous bond to absorb them.
    left_edge_component: bool,
    dimension_cap: usize,
}

impl LocalHamiltonian {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn terms(&self) -> &[ComplexMatrix] {
        &self.terms
    }

    pub fn removed_trace(&self) -> f64 {
        self.removed_trace
    }

    pub fn left_edge_component(&self) -> bool {
        self.left_edge_component
    }

    pub fn dimension_cap(&self) -> usize {
        self.dimension_cap
    }

    pub fn n_bonds(&self) -> usize {
        self.terms.len()
    }

    /// Total Hilbert-space dimension d^N.
    pub fn dim(&self) -> Result<usize> {
        checked_power(self.local_dim, self.n_sites, self.dimension_cap)
    }

    /// Frobenius norm of every term, the recorded "finite operator norm".
    pub fn term_norms(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.frobenius_norm()).collect()
    }
}

fn checked_power(d: usize, n: usize, cap: usize) -> Result<usize> {
    let mut dim = 1usize;
    for _ in 0..n {
        dim = dim
            .checked_mul(d)
            .ok_or(Error::DimensionCap { dim: usize::MAX, cap })?;
        if dim > cap {
            return Err(Error::DimensionCap { dim, cap });
        }
    }
    Ok(dim)
}

/// Partial trace of a two-site d^2 x d^2 matrix over its right site.
fn trace_out_right(m: &ComplexMatrix, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |j, k| {
        (0..d).map(|s| m.at(j * d + s, k * d + s)).sum()
    })
}

/// a (x) I_d embedded as a two-site matrix.
pub(crate) fn left_embed(a: &ComplexMatrix, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (rl, rr) = (r / d, r % d);
        let (cl, cr) = (c / d, c % d);
        if rr == cr {
            a.at(rl, cl)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// I_d (x) a embedded as a two-site matrix.
pub(crate) fn right_embed(a: &ComplexMatrix, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d * d, d * d, |r, c| {
        let (rl, rr) = (r / d, r % d);
        let (cl, cr) = (c / d, c % d);
        if rl == cl {
            a.at(rr, cr)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Bring raw two-site terms into canonical form.
///
/// Per term, the Hilbert-Schmidt projections onto the identity and onto
/// left-site-only operators are stripped; the left-site component moves
/// to the previous bond (as a right-leg operator) and the scalar trace
/// part accumulates into `removed_trace`. On an open chain the first bond
/// has no predecessor, so its left-site component stays put and is
/// flagged.
pub fn canonicalize(
    raw_terms: &[ComplexMatrix],
    n_sites: usize,
    boundary: Boundary,
    dimension_cap: usize,
) -> Result<LocalHamiltonian> {
    if n_sites < 2 {
        return Err(Error::invalid(
            "n_sites",
            format!("need at least 2 sites, got {n_sites}"),
        ));
    }
    let expected_terms = n_bond_count(n_sites, boundary);
    if raw_terms.len() != expected_terms {
        return Err(Error::invalid(
            "terms",
            format!(
                "{boundary} chain of {n_sites} sites needs {expected_terms} terms, got {}",
                raw_terms.len()
            ),
        ));
    }
    let d2 = raw_terms[0].rows();
    let d = (d2 as f64).sqrt().round() as usize;
    if d * d != d2 || d < 2 {
        return Err(Error::invalid(
            "terms",
            format!("term order {d2} is not the square of a local dimension >= 2"),
        ));
    }
    checked_power(d, n_sites, dimension_cap)?;
    for (i, t) in raw_terms.iter().enumerate() {
        if t.rows() != d2 || t.cols() != d2 {
            return Err(Error::DimensionMismatch {
                context: "canonicalize term",
                expected: d2,
                got: t.rows().max(t.cols()),
            });
        }
        t.require_hermitian()
            .map_err(|e| Error::invalid("terms", format!("term {i} rejected: {e}")))?;
    }

    let n_terms = raw_terms.len();
    let mut stripped: Vec<ComplexMatrix> = Vec::with_capacity(n_terms);
    let mut transfers: Vec<Option<ComplexMatrix>> = vec![None; n_terms];
    let mut removed_trace = 0.0f64;
    let mut left_edge_component = false;

    for (i, raw) in raw_terms.iter().enumerate() {
        let tr = raw.trace().re / d2 as f64;
        removed_trace += tr;
        let mut term = raw.clone();
        for k in 0..d2 {
            term.add_at(k, k, Complex64::new(-tr, 0.0));
        }
        // Left-site-only component (tr_right/d is traceless by now).
        let left = trace_out_right(&term, d).scaled(Complex64::new(1.0 / d as f64, 0.0));
        if left.max_abs() > 0.0 {
            let has_predecessor = i > 0 || boundary == Boundary::Periodic;
            if has_predecessor {
                term = term.sub(&left_embed(&left, d));
                let prev = if i == 0 { n_terms - 1 } else { i - 1 };
                let moved = right_embed(&left, d);
                transfers[prev] = Some(match transfers[prev].take() {
                    Some(acc) => acc.add(&moved),
                    None => moved,
                });
            } else {
                left_edge_component = true;
            }
        }
        stripped.push(term);
    }

    let terms: Vec<ComplexMatrix> = stripped
        .into_iter()
        .zip(transfers)
        .map(|(t, x)| match x {
            Some(extra) => t.add(&extra),
            None => t,
        })
        .collect();

    Ok(LocalHamiltonian {
        n_sites,
        local_dim: d,
        boundary,
        terms,
        removed_trace,
        left_edge_component,
        dimension_cap,
    })
}

/// Model selector for [`build_model`].
#[derive(Debug, Clone)]
pub enum ModelSpec {
    /// Independent GUE two-site terms, canonicalized and norm-banded.
    GueLocal {
        n_sites: usize,
        local_dim: usize,
        boundary: Boundary,
        seed: u64,
    },
    /// Mixed-field Ising chain: J ZZ + transverse X + longitudinal Z,
    /// fields folded onto the right leg of each bond.
    Mfim {
        n_sites: usize,
        boundary: Boundary,
        coupling: f64,
        transverse: f64,
        longitudinal: f64,
    },
    /// Terms read from a plain-text file (see README for the format).
    Custom { path: PathBuf },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::GueLocal { .. } => "gue-local",
            ModelSpec::Mfim { .. } => "mfim",
            ModelSpec::Custom { .. } => "custom",
        }
    }
}

/// Build a canonicalized model Hamiltonian. Deterministic per seed.
pub fn build_model(spec: &ModelSpec, dimension_cap: usize) -> Result<LocalHamiltonian> {
    match *spec {
        ModelSpec::GueLocal {
            n_sites,
            local_dim,
            boundary,
            seed,
        } => build_gue_local(n_sites, local_dim, boundary, seed, dimension_cap),
        ModelSpec::Mfim {
            n_sites,
            boundary,
            coupling,
            transverse,
            longitudinal,
        } => build_mfim(
            n_sites,
            boundary,
            coupling,
            transverse,
            longitudinal,
            dimension_cap,
        ),
        ModelSpec::Custom { ref path } => load_custom(path, dimension_cap),
    }
}

fn n_bond_count(n_sites: usize, boundary: Boundary) -> usize {
    match boundary {
        Boundary::Periodic => n_sites,
        Boundary::Open => n_sites - 1,
    }
}

/// GUE matrix of the given order: real N(0,1) diagonal, off-diagonal
/// entries with independent N(0, 1/2) real and imaginary parts.
fn sample_gue(order: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(order, order);
    for i in 0..order {
        let x: f64 = rng.sample(StandardNormal);
        m.set(i, i, Complex64::new(x, 0.0));
        for j in (i + 1)..order {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2;
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    m
}

pub fn build_gue_local(
    n_sites: usize,
    local_dim: usize,
    boundary: Boundary,
    seed: u64,
    dimension_cap: usize,
) -> Result<LocalHamiltonian> {
    if n_sites < 2 {
        return Err(Error::invalid("n_sites", "gue-local needs at least 2 sites"));
    }
    if local_dim < 2 {
        return Err(Error::invalid("local_dim", "local dimension must be >= 2"));
    }
    let order = local_dim * local_dim;
    let raw: Vec<ComplexMatrix> = (0..n_bond_count(n_sites, boundary))
        .map(|i| {
            let mut rng = task_rng(seed, "gue-term", i as u64);
            sample_gue(order, &mut rng)
        })
        .collect();
    let mut h = canonicalize(&raw, n_sites, boundary, dimension_cap)?;

    // Rescale each canonical term's Frobenius norm into the O(1) band.
    // Zero terms have no meaningful norm and are rejected.
    let (lo, hi) = GUE_NORM_BAND;
    for (i, term) in h.terms.iter_mut().enumerate() {
        let norm = term.frobenius_norm();
        if norm == 0.0 {
            return Err(Error::invalid(
                "seed",
                format!("gue-local term {i} canonicalized to zero"),
            ));
        }
        let target = norm.clamp(lo, hi);
        if target != norm {
            *term = term.scaled(Complex64::new(target / norm, 0.0));
        }
    }
    Ok(h)
}

pub fn build_mfim(
    n_sites: usize,
    boundary: Boundary,
    coupling: f64,
    transverse: f64,
    longitudinal: f64,
    dimension_cap: usize,
) -> Result<LocalHamiltonian> {
    if n_sites < 2 {
        return Err(Error::invalid("n_sites", "mfim needs at least 2 sites"));
    }
    let x = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let z = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let zz = crate::linalg::kron(&z, &z, 4).expect("2x2 kron fits any cap");
    let field = x
        .scaled(Complex64::new(transverse, 0.0))
        .add(&z.scaled(Complex64::new(longitudinal, 0.0)));

    // Site i+1's field rides on bond i's right leg, so every site is
    // covered exactly once on a ring. On an open chain site 0 has no
    // previous bond; its field rides on bond 0's left leg and stays there
    // through canonicalization (flagged).
    let raw: Vec<ComplexMatrix> = (0..n_bond_count(n_sites, boundary))
        .map(|i| {
            let mut t = zz.scaled(Complex64::new(coupling, 0.0));
            t = t.add(&right_embed(&field, 2));
            if boundary == Boundary::Open && i == 0 {
                t = t.add(&left_embed(&field, 2));
            }
            t
        })
        .collect();
    canonicalize(&raw, n_sites, boundary, dimension_cap)
}

/// Parse the custom-model file format: header `N d boundary`, then one
/// bond per line as the bond index followed by 2*d^4 reals (real/imag
/// interleaved, row-major). Missing bonds are zero terms.
pub fn load_custom(path: &Path, dimension_cap: usize) -> Result<LocalHamiltonian> {
    let content = std::fs::read_to_string(path)?;
    parse_custom(&content, dimension_cap)
}

pub fn parse_custom(content: &str, dimension_cap: usize) -> Result<LocalHamiltonian> {
    let mut lines = content
        .lines()
        .enumerate()
        .map(|(no, l)| (no + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_no, header) = lines.next().ok_or_else(|| Error::ModelFileParse {
        line: 0,
        message: "empty file".into(),
    })?;
    let parse_count = |tok: Option<&str>, what: &str, line: usize| -> Result<usize> {
        tok.ok_or_else(|| Error::ModelFileParse {
            line,
            message: format!("missing {what}"),
        })?
        .parse::<usize>()
        .map_err(|e| Error::ModelFileParse {
            line,
            message: format!("bad {what}: {e}"),
        })
    };
    let mut parts = header.split_whitespace();
    let n_sites = parse_count(parts.next(), "site count", header_no)?;
    let d = parse_count(parts.next(), "local dimension", header_no)?;
    let boundary: Boundary = parts
        .next()
        .ok_or_else(|| Error::ModelFileParse {
            line: header_no,
            message: "missing boundary".into(),
        })?
        .parse()
        .map_err(|e| Error::ModelFileParse {
            line: header_no,
            message: format!("{e}"),
        })?;
    if parts.next().is_some() {
        return Err(Error::ModelFileParse {
            line: header_no,
            message: "trailing tokens after header".into(),
        });
    }
    if n_sites < 2 || d < 2 {
        return Err(Error::ModelFileParse {
            line: header_no,
            message: format!("invalid chain: N={n_sites}, d={d}"),
        });
    }

    let bonds = n_bond_count(n_sites, boundary);
    let d2 = d * d;
    let entries = d2 * d2;
    let mut raw = vec![ComplexMatrix::zeros(d2, d2); bonds];
    let mut seen = vec![false; bonds];
    for (no, line) in lines {
        let mut toks = line.split_whitespace();
        let bond = parse_count(toks.next(), "bond index", no)?;
        if bond >= bonds {
            return Err(Error::ModelFileParse {
                line: no,
                message: format!("bond index {bond} out of range (0..{bonds})"),
            });
        }
        if seen[bond] {
            return Err(Error::ModelFileParse {
                line: no,
                message: format!("duplicate bond {bond}"),
            });
        }
        seen[bond] = true;
        let mut values = Vec::with_capacity(2 * entries);
        for tok in toks {
            let v: f64 = tok.parse().map_err(|e| Error::ModelFileParse {
                line: no,
                message: format!("bad number '{tok}': {e}"),
            })?;
            values.push(v);
        }
        if values.len() != 2 * entries {
            return Err(Error::ModelFileParse {
                line: no,
                message: format!(
                    "expected {} numbers for a d={d} term, got {}",
                    2 * entries,
                    values.len()
                ),
            });
        }
        let data: Vec<Complex64> = values
            .chunks_exact(2)
            .map(|p| Complex64::new(p[0], p[1]))
            .collect();
        raw[bond] = ComplexMatrix::from_data(d2, d2, data);
    }
    canonicalize(&raw, n_sites, boundary, dimension_cap)
}

/// Add a two-site term acting on sites (p, q) to a dense full matrix.
fn add_two_site_term(
    h: &mut ComplexMatrix,
    term: &ComplexMatrix,
    n_sites: usize,
    d: usize,
    p: usize,
    q: usize,
) {
    let dim = h.rows();
    let wp = d.pow((n_sites - 1 - p) as u32);
    let wq = d.pow((n_sites - 1 - q) as u32);
    for x in 0..dim {
        let xp = (x / wp) % d;
        let xq = (x / wq) % d;
        let row = xp * d + xq;
        let base = x - xp * wp - xq * wq;
        for yp in 0..d {
            for yq in 0..d {
                let v = term.at(row, yp * d + yq);
                if v != Complex64::new(0.0, 0.0) {
                    h.add_at(x, base + yp * wp + yq * wq, v);
                }
            }
        }
    }
}

/// Assemble the dense d^N x d^N matrix of the canonical Hamiltonian.
pub fn assemble_dense(h: &LocalHamiltonian) -> Result<ComplexMatrix> {
    let dim = h.dim()?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (i, term) in h.terms.iter().enumerate() {
        add_two_site_term(&mut out, term, h.n_sites, h.local_dim, i, (i + 1) % h.n_sites);
    }
    Ok(out)
}

/// H = H_A + H_Abar + boundary for a contiguous subsystem.
///
/// `h_a` collects the L-1 bonds interior to A, embedded in A's relabeled
/// d_A-dimensional space (ring order from `start`); `h_abar` likewise for
/// the complement. Everything else (the two cut bonds, or the single wrap
/// bond when L = N on a ring) stays in `boundary_bonds` as full-system
/// term indices.
pub struct HamiltonianSplit {
    pub spec: SubsystemSpec,
    pub h_a: ComplexMatrix,
    pub h_abar: ComplexMatrix,
    pub boundary_bonds: Vec<usize>,
}

pub fn split_subsystem(h: &LocalHamiltonian, a: SubsystemSpec) -> Result<HamiltonianSplit> {
    a.validate(h.n_sites)?;
    let n = h.n_sites;
    let d = h.local_dim;
    let la = a.length;
    let lb = n - a.length;
    let mut h_a = ComplexMatrix::zeros(a.dim_a(d), a.dim_a(d));
    let mut h_abar = ComplexMatrix::zeros(a.dim_abar(d, n), a.dim_abar(d, n));
    let mut boundary_bonds = Vec::new();

    let offset_of = |site: usize| (site + n - a.start) % n;
    for i in 0..h.terms.len() {
        let off = offset_of(i);
        if off + 1 < la {
            add_two_site_term(&mut h_a, &h.terms[i], la, d, off, off + 1);
        } else if off >= la && off + 1 < n {
            let boff = off - la;
            add_two_site_term(&mut h_abar, &h.terms[i], lb, d, boff, boff + 1);
        } else {
            boundary_bonds.push(i);
        }
    }
    Ok(HamiltonianSplit {
        spec: a,
        h_a,
        h_abar,
        boundary_bonds,
    })
}

impl HamiltonianSplit {
    /// Rebuild the full Hamiltonian from the split:
    /// h_a (x) I + I (x) h_abar (site-permuted back) + boundary terms.
    pub fn reassemble(&self, h: &LocalHamiltonian) -> Result<ComplexMatrix> {
        let dim = h.dim()?;
        let bip = Bipartition::new(h.n_sites, h.local_dim, self.spec)?;
        let mut out = ComplexMatrix::zeros(dim, dim);
        let da = bip.dim_a();
        let db = bip.dim_b();
        for a in 0..da {
            for a2 in 0..da {
                let v = self.h_a.at(a, a2);
                if v != Complex64::new(0.0, 0.0) {
                    for b in 0..db {
                        out.add_at(bip.full_index(a, b), bip.full_index(a2, b), v);
                    }
                }
            }
        }
        for b in 0..db {
            for b2 in 0..db {
                let v = self.h_abar.at(b, b2);
                if v != Complex64::new(0.0, 0.0) {
                    for a in 0..da {
                        out.add_at(bip.full_index(a, b), bip.full_index(a, b2), v);
                    }
                }
            }
        }
        for &i in &self.boundary_bonds {
            add_two_site_term(
                &mut out,
                &h.terms[i],
                h.n_sites,
                h.local_dim,
                i,
                (i + 1) % h.n_sites,
            );
        }
        Ok(out)
    }
}

/// Spectral-variance bookkeeping: s^2 = tr(H^2)/d^N and its subsystem
/// analogues, each computed two ways (direct trace of the assembled
/// matrix, and the per-term sum the canonical form makes exact) and
/// cross-checked.
#[derive(Debug, Clone)]
pub struct VarianceReport {
    pub s2: f64,
    pub s2_a: f64,
    pub s2_abar: f64,
    pub s2_per_term: Vec<f64>,
}

pub fn variance_report(h: &LocalHamiltonian, a: SubsystemSpec) -> Result<VarianceReport> {
    a.validate(h.n_sites)?;
    let d2 = (h.local_dim * h.local_dim) as f64;
    let s2_per_term: Vec<f64> = h
        .terms
        .iter()
        .map(|t| {
            let f = t.frobenius_norm();
            f * f / d2
        })
        .collect();
    let s2 = compensated_sum(s2_per_term.iter().copied());

    // Direct route through the assembled matrix.
    let dense = assemble_dense(h)?;
    let frob = dense.frobenius_norm();
    let s2_direct = frob * frob / dense.rows() as f64;
    let tol = 1e-9 * (1.0 + s2.abs());
    if (s2 - s2_direct).abs() > tol {
        return Err(Error::invariant(
            "s2 per-term sum vs direct trace",
            (s2 - s2_direct).abs(),
            tol,
        ));
    }

    let split = split_subsystem(h, a)?;
    let s2_a = {
        let f = split.h_a.frobenius_norm();
        f * f / split.h_a.rows() as f64
    };
    let s2_abar = {
        let f = split.h_abar.frobenius_norm();
        f * f / split.h_abar.rows() as f64
    };
    // Per-term route for the subsystem variances.
    let offset_of = |site: usize| (site + h.n_sites - a.start) % h.n_sites;
    let mut s2_a_sum = 0.0;
    let mut s2_abar_sum = 0.0;
    for (i, &t2) in s2_per_term.iter().enumerate() {
        let off = offset_of(i);
        if off + 1 < a.length {
            s2_a_sum += t2;
        } else if off >= a.length && off + 1 < h.n_sites {
            s2_abar_sum += t2;
        }
    }
    for (label, per_term, direct) in [
        ("s2_a", s2_a_sum, s2_a),
        ("s2_abar", s2_abar_sum, s2_abar),
    ] {
        let tol = 1e-9 * (1.0 + per_term.abs());
        if (per_term - direct).abs() > tol {
            return Err(Error::invariant(
                format!("{label} per-term sum vs direct trace"),
                (per_term - direct).abs(),
                tol,
            ));
        }
    }

    Ok(VarianceReport {
        s2,
        s2_a,
        s2_abar,
        s2_per_term,
    })
}

/// Normalized power-trace moments tr(H_A^r)/d_A for r = 1..=r_max,
/// computed from the eigenvalues of h_a.
pub fn moment_report(h_a: &ComplexMatrix, r_max: usize) -> Result<Vec<f64>> {
    if r_max < 1 {
        return Err(Error::invalid("r_max", "need r_max >= 1"));
    }
    h_a.require_hermitian()?;
    let eig = hermitian_eig(h_a)?;
    let dim = h_a.rows() as f64;
    Ok((1..=r_max)
        .map(|r| compensated_sum(eig.eigenvalues.iter().map(|&x| x.powi(r as i32))) / dim)
        .collect())
}
