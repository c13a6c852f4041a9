//! Complex-scaled Hamiltonian and overlap of the B + B + X problem in a boson-symmetrized
//! Gaussian basis.
//!
//! Basis functions live in one BX-pair Jacobi set `c` (2 or 3):
//! `Φ_α = φ_n(r_c) ψ_N(R_c)` with polynomial degrees `(l, L)` from the block list. Matrix
//! elements are taken between `Φ_α` and the projected ket `(1 + P₂₃) Φ_β`.
//!
//! Every basis function is a short linear combination of primitives
//! `z^l Z^L e^{-a z² - b Z²}` with possibly complex exponents, so the matrices are built
//! as `Cᵀ G C` where `G` holds primitive integrals and `C` the (sparse) expansion.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{BasisFunction, GaussBasisSpec};
use crate::error::{Error, Result};
use crate::gaussint::{
    check_theta, component_gaussian, component_integrals, PreparedTerm, Primitive,
};
use crate::jacobi::{exchange, transform, JacobiSet, JacobiTransform};
use crate::twobody::GaussPotential;
use crate::units::{Dimension, MassConfig};

type C = Complex64;

/// Three-body channel basis: pair ranges, spectator ranges and `(l, L)` blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelBasis {
    pub dimension: Dimension,
    pub pair: GaussBasisSpec,
    pub third: GaussBasisSpec,
    pub blocks: Vec<(u8, u8)>,
    #[serde(default = "default_set")]
    pub jacobi_set: JacobiSet,
}

fn default_set() -> JacobiSet {
    JacobiSet::Two
}

impl ChannelBasis {
    /// Production parameters. 3D: `2 × 16` complex-ranged functions on both coordinates,
    /// s-waves. 1D: 32 real ranges with the even-parity blocks `(0,0)` and `(1,1)`.
    pub fn production(dimension: Dimension) -> Self {
        match dimension {
            Dimension::Three => Self {
                dimension,
                pair: GaussBasisSpec::new(16, 68.83, 0.0058).with_omega(DEFAULT_OMEGA),
                third: GaussBasisSpec::new(16, 61.85, 0.011).with_omega(DEFAULT_OMEGA),
                blocks: vec![(0, 0)],
                jacobi_set: JacobiSet::Two,
            },
            Dimension::One => Self {
                dimension,
                pair: GaussBasisSpec::new(32, 318.9, 0.037).with_ell(1),
                third: GaussBasisSpec::new(32, 45.65, 0.023).with_ell(1),
                blocks: vec![(0, 0), (1, 1)],
                jacobi_set: JacobiSet::Two,
            },
        }
    }

    pub fn with_set(mut self, set: JacobiSet) -> Self {
        self.jacobi_set = set;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.pair.validate()?;
        self.third.validate()?;
        if self.blocks.is_empty() {
            return Err(Error::InvalidBasis("no angular/parity blocks".into()));
        }
        for &(l, big_l) in &self.blocks {
            if l > 1 || big_l > 1 {
                return Err(Error::InvalidBasis(format!("block ({l},{big_l}) exceeds degree 1")));
            }
            if self.dimension == Dimension::Three && (l, big_l) != (0, 0) {
                return Err(Error::InvalidBasis(format!("3D block ({l},{big_l}) not supported; only s-waves")));
            }
            if (l + big_l) % 2 != 0 {
                return Err(Error::InvalidBasis(format!("block ({l},{big_l}) has odd total parity")));
            }
        }
        let mut seen = self.blocks.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.blocks.len() {
            return Err(Error::InvalidBasis("duplicate blocks".into()));
        }
        if self.jacobi_set == JacobiSet::One {
            return Err(Error::InvalidBasis("working set must contain an interacting BX pair (2 or 3)".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.blocks.len() * self.pair.len() * self.third.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Basis functions in block-major, then pair-major order.
    pub fn functions(&self) -> Result<Vec<ChannelFunction>> {
        self.validate()?;
        let mut out = Vec::with_capacity(self.len());
        for &(l, big_l) in &self.blocks {
            let pf = self.pair.functions(l, self.dimension)?;
            let tf = self.third.functions(big_l, self.dimension)?;
            for p in &pf {
                for t in &tf {
                    out.push(ChannelFunction { block: (l, big_l), pair: *p, third: *t });
                }
            }
        }
        Ok(out)
    }

    /// Stable content hash (hex SHA-256 of the JSON form).
    pub fn hash_hex(&self) -> String {
        let json = serde_json::to_vec(self).expect("basis serializes");
        hex(&Sha256::digest(&json))
    }
}

/// Oscillation parameter of the complex-ranged 3D functions.
pub const DEFAULT_OMEGA: f64 = 0.8;

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelFunction {
    pub block: (u8, u8),
    pub pair: BasisFunction,
    pub third: BasisFunction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyMetadata {
    pub basis_hash: String,
    pub v0_prime: f64,
    pub jacobi_set: JacobiSet,
    pub size: usize,
}

/// `H(θ)` and `S` in the symmetrized basis.
#[derive(Clone, Debug)]
pub struct AssembledProblem {
    pub h_matrix: Array2<C>,
    pub s_matrix: Array2<C>,
    pub theta: f64,
    pub beta: f64,
    pub dimension: Dimension,
    pub metadata: AssemblyMetadata,
}

impl AssembledProblem {
    pub fn size(&self) -> usize {
        self.h_matrix.nrows()
    }

    /// `max|M - Mᵀ| / max|M|` for H and S.
    pub fn symmetry_defect(&self) -> (f64, f64) {
        (asymmetry(&self.h_matrix), asymmetry(&self.s_matrix))
    }
}

fn asymmetry(m: &Array2<C>) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..i {
            worst = worst.max((m[[i, j]] - m[[j, i]]).norm());
        }
    }
    worst / scale
}

/// θ-independent overlap and kinetic matrices plus one potential matrix per angle.
///
/// `H(θ) = e^{-2iθ} T + v0 V(θ)`; `S` and `T` are real because every basis function is real.
#[derive(Clone, Debug)]
pub struct HamiltonianParts {
    pub s: Array2<f64>,
    pub t: Array2<f64>,
    /// Unit-depth `V₁₂ + V₃₁` per angle.
    pub v: Vec<Array2<C>>,
    pub thetas: Vec<f64>,
    pub beta: f64,
    pub dimension: Dimension,
    pub metadata: AssemblyMetadata,
}

impl HamiltonianParts {
    pub fn problem(&self, k: usize) -> AssembledProblem {
        let theta = self.thetas[k];
        let phase = C::from_polar(1.0, -2.0 * theta);
        let v0 = self.metadata.v0_prime;
        let mut h = self.v[k].mapv(|z| z * v0);
        h.zip_mut_with(&self.t, |hv, &tv| *hv += phase * tv);
        if theta == 0.0 {
            h.mapv_inplace(|z| C::new(z.re, 0.0));
        }
        AssembledProblem {
            h_matrix: h,
            s_matrix: self.s.mapv(C::from),
            theta,
            beta: self.beta,
            dimension: self.dimension,
            metadata: self.metadata.clone(),
        }
    }

    pub fn problems(&self) -> Vec<AssembledProblem> {
        (0..self.thetas.len()).map(|k| self.problem(k)).collect()
    }
}

/// Primitive products and the sparse expansion of each basis function over them.
struct Expansion {
    primitives: Vec<Primitive>,
    /// For every basis function: `(primitive index, coefficient)`.
    columns: Vec<Vec<(usize, C)>>,
    labels: Vec<ChannelFunction>,
}

fn expand(basis: &ChannelBasis) -> Result<Expansion> {
    let labels = basis.functions()?;
    let mut index: HashMap<(u8, u8, [u64; 4]), usize> = HashMap::new();
    let mut primitives = Vec::new();
    let mut columns = Vec::with_capacity(labels.len());
    for f in &labels {
        let mut col = Vec::new();
        for (cp, a) in f.pair.primitives() {
            for (ct, b) in f.third.primitives() {
                let key = (f.block.0, f.block.1, [a.re.to_bits(), a.im.to_bits(), b.re.to_bits(), b.im.to_bits()]);
                let k = *index.entry(key).or_insert_with(|| {
                    primitives.push(Primitive::new(f.block.0, f.block.1, a, b));
                    primitives.len() - 1
                });
                col.push((k, cp * ct));
            }
        }
        columns.push(col);
    }
    Ok(Expansion { primitives, columns, labels })
}

/// Geometry shared by all primitive integrals of one assembly.
struct Geometry {
    exchange: JacobiTransform,
    kinetic: [f64; 2],
    rows: [[f64; 2]; 2],
    dim: Dimension,
}

impl Geometry {
    fn new(cfg: &MassConfig, basis: &ChannelBasis) -> Self {
        let set = basis.jacobi_set;
        let mu = set.reduced_masses(cfg);
        let kappa = basis.dimension.kinetic_scale();
        Self {
            exchange: exchange(set, cfg),
            kinetic: [kappa / (2.0 * mu[0]), kappa / (2.0 * mu[1])],
            rows: [
                transform(set, JacobiSet::Three, cfg).pair_row(),
                transform(set, JacobiSet::Two, cfg).pair_row(),
            ],
            dim: basis.dimension,
        }
    }
}

/// Symmetrized primitive integrals `⟨p| O (1 + P₂₃) |q⟩`.
struct PrimitiveBlock {
    s: C,
    t: C,
    v: Vec<C>,
}

fn primitive_block(
    bra: &PreparedTerm,
    ket: [&PreparedTerm; 2],
    geo: &Geometry,
    gammas: &[C],
) -> Result<PrimitiveBlock> {
    let d = geo.dim.spatial() as i32;
    let mut out = PrimitiveBlock { s: C::from(0.0), t: C::from(0.0), v: vec![C::from(0.0); gammas.len()] };
    for k in ket {
        let ci = component_integrals(bra, k)?;
        let g = ci.gradient[0] * geo.kinetic[0] + ci.gradient[1] * geo.kinetic[1];
        out.s += ci.overlap.powi(d);
        out.t += g * (d as f64) * ci.overlap.powi(d - 1);
        for (slot, &gamma) in out.v.iter_mut().zip(gammas) {
            for row in geo.rows {
                *slot += component_gaussian(bra, k, row, gamma)?.powi(d);
            }
        }
    }
    Ok(out)
}

/// Builds `S`, `T` and `V(θ)` for every requested angle.
pub fn assemble_parts(
    cfg: &MassConfig,
    pot: &GaussPotential,
    basis: &ChannelBasis,
    thetas: &[f64],
) -> Result<HamiltonianParts> {
    if thetas.is_empty() {
        return Err(Error::Domain("at least one scaling angle is required".into()));
    }
    for &th in thetas {
        check_theta(th)?;
    }
    if !pot.v0_prime.is_finite() {
        return Err(Error::Domain("potential depth must be finite".into()));
    }
    let exp = expand(basis)?;
    let geo = Geometry::new(cfg, basis);
    let gammas: Vec<C> = thetas.iter().map(|&th| C::from_polar(1.0, 2.0 * th)).collect();

    let bras: Vec<PreparedTerm> =
        exp.primitives.iter().map(|p| PreparedTerm::new(p.term(&JacobiTransform::IDENTITY))).collect();
    let kets_x: Vec<PreparedTerm> = exp.primitives.iter().map(|p| PreparedTerm::new(p.term(&geo.exchange))).collect();

    let np = exp.primitives.len();
    let rows: Vec<Vec<PrimitiveBlock>> = (0..np)
        .into_par_iter()
        .map(|p| {
            (p..np)
                .map(|q| primitive_block(&bras[p], [&bras[q], &kets_x[q]], &geo, &gammas))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut gs = Array2::<C>::zeros((np, np));
    let mut gt = Array2::<C>::zeros((np, np));
    let mut gv: Vec<Array2<C>> = (0..thetas.len()).map(|_| Array2::zeros((np, np))).collect();
    for (p, row) in rows.into_iter().enumerate() {
        for (off, b) in row.into_iter().enumerate() {
            let q = p + off;
            gs[[p, q]] = b.s;
            gs[[q, p]] = b.s;
            gt[[p, q]] = b.t;
            gt[[q, p]] = b.t;
            for (m, v) in gv.iter_mut().zip(b.v) {
                m[[p, q]] = v;
                m[[q, p]] = v;
            }
        }
    }

    let s = contract(&gs, &exp.columns).mapv(|z| z.re);
    let t = contract(&gt, &exp.columns).mapv(|z| z.re);
    let v: Vec<Array2<C>> = gv
        .iter()
        .zip(thetas)
        .map(|(g, &th)| {
            let m = contract(g, &exp.columns);
            if th == 0.0 {
                m.mapv(|z| C::new(z.re, 0.0))
            } else {
                m
            }
        })
        .collect();

    check_norms(&s, &exp.labels)?;
    Ok(HamiltonianParts {
        s,
        t,
        v,
        thetas: thetas.to_vec(),
        beta: cfg.beta(),
        dimension: basis.dimension,
        metadata: AssemblyMetadata {
            basis_hash: basis.hash_hex(),
            v0_prime: pot.v0_prime,
            jacobi_set: basis.jacobi_set,
            size: exp.labels.len(),
        },
    })
}

/// `M_kl = Σ C_pk C_ql G_pq`, symmetric by construction.
fn contract(g: &Array2<C>, columns: &[Vec<(usize, C)>]) -> Array2<C> {
    let n = columns.len();
    let rows: Vec<Vec<C>> = (0..n)
        .into_par_iter()
        .map(|k| {
            (k..n)
                .map(|l| {
                    let mut acc = C::from(0.0);
                    for &(p, cp) in &columns[k] {
                        for &(q, cq) in &columns[l] {
                            acc += cp * cq * g[[p, q]];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut m = Array2::<C>::zeros((n, n));
    for (k, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            m[[k, k + off]] = v;
            m[[k + off, k]] = v;
        }
    }
    m
}

fn check_norms(s: &Array2<f64>, labels: &[ChannelFunction]) -> Result<()> {
    for (k, f) in labels.iter().enumerate() {
        let d = s[[k, k]];
        if !(d > 1e-12) || !d.is_finite() {
            return Err(Error::Assembly(format!(
                "symmetrized norm {d:e} of basis function {k} in block {:?} (pair range {}, spectator range {}) is not positive",
                f.block, f.pair.range, f.third.range
            )));
        }
    }
    Ok(())
}

pub fn assemble(cfg: &MassConfig, pot: &GaussPotential, basis: &ChannelBasis, theta: f64) -> Result<AssembledProblem> {
    Ok(assemble_parts(cfg, pot, basis, &[theta])?.problem(0))
}

pub fn assemble_thetas(
    cfg: &MassConfig,
    pot: &GaussPotential,
    basis: &ChannelBasis,
    thetas: &[f64],
) -> Result<Vec<AssembledProblem>> {
    Ok(assemble_parts(cfg, pot, basis, thetas)?.problems())
}

const CACHE_MAGIC: &[u8; 8] = b"GEMCSMMX";
const CACHE_VERSION: u32 = 1;

/// On-disk cache of assembled matrices. Purely an optimization.
#[derive(Clone, Debug)]
pub struct MatrixCache {
    dir: PathBuf,
}

impl MatrixCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn key(beta: f64, theta: f64, basis: &ChannelBasis, v0_prime: f64) -> String {
        let text = format!(
            "v{CACHE_VERSION}|{:016x}|{:016x}|{}|{:016x}|{}",
            beta.to_bits(),
            theta.to_bits(),
            basis.hash_hex(),
            v0_prime.to_bits(),
            basis.dimension
        );
        hex(&Sha256::digest(text.as_bytes()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.bin"))
    }

    pub fn load(&self, key: &str, template: &AssemblyMetadata) -> Result<Option<(Array2<C>, Array2<C>)>> {
        let path = self.path(key);
        if !path.exists() {
            return Ok(None);
        }
        let mut buf = Vec::new();
        std::fs::File::open(&path)?.read_to_end(&mut buf)?;
        match decode(&buf, template.size) {
            Ok(m) => Ok(Some(m)),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {}: {e}", path.display());
                Ok(None)
            }
        }
    }

    pub fn store(&self, key: &str, problem: &AssembledProblem) -> Result<()> {
        let path = self.path(key);
        let tmp = path.with_extension("tmp");
        {
            let mut f = std::io::BufWriter::new(std::fs::File::create(&tmp)?);
            f.write_all(CACHE_MAGIC)?;
            f.write_all(&CACHE_VERSION.to_le_bytes())?;
            f.write_all(&(problem.size() as u64).to_le_bytes())?;
            for m in [&problem.h_matrix, &problem.s_matrix] {
                for z in m.iter() {
                    f.write_all(&z.re.to_le_bytes())?;
                    f.write_all(&z.im.to_le_bytes())?;
                }
            }
            f.flush()?;
        }
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

fn decode(buf: &[u8], expected: usize) -> Result<(Array2<C>, Array2<C>)> {
    let bad = |m: &str| Error::Cache(m.to_string());
    if buf.len() < 20 || &buf[..8] != CACHE_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(bad("version mismatch"));
    }
    let n = u64::from_le_bytes(buf[12..20].try_into().unwrap()) as usize;
    if n != expected || buf.len() != 20 + 2 * n * n * 16 {
        return Err(bad("size mismatch"));
    }
    let mut vals = buf[20..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut read = || {
        Array2::from_shape_fn((n, n), |_| {
            let re = vals.next().unwrap();
            let im = vals.next().unwrap();
            C::new(re, im)
        })
    };
    let h = read();
    let s = read();
    Ok((h, s))
}

/// `assemble_thetas` with a read-through cache.
pub fn assemble_cached(
    cfg: &MassConfig,
    pot: &GaussPotential,
    basis: &ChannelBasis,
    thetas: &[f64],
    cache: Option<&MatrixCache>,
) -> Result<Vec<AssembledProblem>> {
    let Some(cache) = cache else {
        return assemble_thetas(cfg, pot, basis, thetas);
    };
    let meta = AssemblyMetadata {
        basis_hash: basis.hash_hex(),
        v0_prime: pot.v0_prime,
        jacobi_set: basis.jacobi_set,
        size: basis.len(),
    };
    let keys: Vec<String> = thetas.iter().map(|&th| MatrixCache::key(cfg.beta(), th, basis, pot.v0_prime)).collect();
    let mut hits = Vec::new();
    for (k, &th) in keys.iter().zip(thetas) {
        check_theta(th)?;
        match cache.load(k, &meta)? {
            Some((h, s)) => hits.push(AssembledProblem {
                h_matrix: h,
                s_matrix: s,
                theta: th,
                beta: cfg.beta(),
                dimension: basis.dimension,
                metadata: meta.clone(),
            }),
            None => break,
        }
    }
    if hits.len() == thetas.len() {
        return Ok(hits);
    }
    let problems = assemble_thetas(cfg, pot, basis, thetas)?;
    for (k, p) in keys.iter().zip(&problems) {
        if let Err(e) = cache.store(k, p) {
            log::warn!("could not write cache entry: {e}");
        }
    }
    Ok(problems)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dim: Dimension) -> ChannelBasis {
        match dim {
            Dimension::Three => ChannelBasis {
                dimension: dim,
                pair: GaussBasisSpec::new(3, 4.0, 0.2),
                third: GaussBasisSpec::new(3, 3.0, 0.1),
                blocks: vec![(0, 0)],
                jacobi_set: JacobiSet::Two,
            },
            Dimension::One => ChannelBasis {
                dimension: dim,
                pair: GaussBasisSpec::new(3, 4.0, 0.2).with_ell(1),
                third: GaussBasisSpec::new(3, 3.0, 0.1).with_ell(1),
                blocks: vec![(0, 0), (1, 1)],
                jacobi_set: JacobiSet::Two,
            },
        }
    }

    #[test]
    fn production_sizes() {
        assert_eq!(ChannelBasis::production(Dimension::Three).len(), 1024);
        assert_eq!(ChannelBasis::production(Dimension::One).len(), 2048);
        assert_eq!(ChannelBasis::production(Dimension::One).len(), 2 * 32 * 32);
    }

    #[test]
    fn rejects_bad_blocks() {
        let mut b = tiny(Dimension::One);
        b.blocks = vec![(0, 1)];
        assert!(b.validate().is_err());
        let mut b = tiny(Dimension::Three);
        b.blocks = vec![(1, 1)];
        assert!(b.validate().is_err());
        assert!(tiny(Dimension::One).with_set(JacobiSet::One).validate().is_err());
    }

    #[test]
    fn theta_zero_is_real_symmetric() {
        let cfg = MassConfig::new(1.0).unwrap();
        for dim in [Dimension::One, Dimension::Three] {
            let p = assemble(&cfg, &GaussPotential::new(-5.0), &tiny(dim), 0.0).unwrap();
            assert!(p.h_matrix.iter().all(|z| z.im == 0.0));
            assert!(p.s_matrix.iter().all(|z| z.im == 0.0));
            let (h, s) = p.symmetry_defect();
            assert_eq!(h, 0.0);
            assert_eq!(s, 0.0);
        }
    }

    #[test]
    fn rejects_large_theta() {
        let cfg = MassConfig::new(1.0).unwrap();
        let r = assemble(&cfg, &GaussPotential::new(-5.0), &tiny(Dimension::One), 0.9);
        assert!(matches!(r, Err(Error::Analyticity { .. })));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = MatrixCache::new(dir.path()).unwrap();
        let cfg = MassConfig::new(2.0).unwrap();
        let pot = GaussPotential::new(-4.0);
        let basis = tiny(Dimension::One);
        let a = assemble_cached(&cfg, &pot, &basis, &[0.1], Some(&cache)).unwrap();
        let b = assemble_cached(&cfg, &pot, &basis, &[0.1], Some(&cache)).unwrap();
        assert_eq!(a[0].h_matrix, b[0].h_matrix);
        assert_eq!(a[0].s_matrix, b[0].s_matrix);
        assert_ne!(MatrixCache::key(2.0, 0.1, &basis, -4.0), MatrixCache::key(2.0, 0.1, &basis, -4.5));
    }
}
