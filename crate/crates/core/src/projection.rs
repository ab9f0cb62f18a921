//! Random projection maps: conventional dense/sparse RP, the tensor random
//! projection (a Khatri-Rao product of small factors, applied lazily), and
//! the variance-reduced ensemble of independent TRPs.

use crate::dist::{sample_matrix, DistFamily, EntryDistribution, SeedSpec};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, khatri_rao_all, DenseMatrix, Vector};

/// Default entry cap for [`TensorRandomProjection::materialize`].
pub const MATERIALIZE_CAP: usize = 10_000_000;

/// A linear map `ℝᵈ → ℝᵏ`.
pub trait Projection: Send + Sync {
    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    fn apply(&self, x: &[f64]) -> Result<Vector>;

    /// Number of random scalars the map keeps.
    fn storage_count(&self) -> usize;
}

fn check_input(op: &'static str, expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Dimension {
            op,
            expected,
            got: x.len(),
        });
    }
    Ok(())
}

fn check_range(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Argument("range dimension k must be at least 1".into()));
    }
    Ok(())
}

/// Dense `d × k` random matrix applied as `(1/√k)·Aᵀx`.
#[derive(Debug, Clone)]
pub struct ConventionalRp {
    matrix: DenseMatrix,
    dist: EntryDistribution,
    scale: f64,
}

impl ConventionalRp {
    pub fn build(d: usize, k: usize, dist: EntryDistribution, seed: &SeedSpec) -> Result<Self> {
        check_range(k)?;
        let matrix = sample_matrix(&dist, d, k, seed)?;
        Ok(Self {
            matrix,
            dist,
            scale: 1.0 / (k as f64).sqrt(),
        })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn dist(&self) -> EntryDistribution {
        self.dist
    }
}

impl Projection for ConventionalRp {
    fn input_dim(&self) -> usize {
        self.matrix.rows()
    }

    fn output_dim(&self) -> usize {
        self.matrix.cols()
    }

    fn apply(&self, x: &[f64]) -> Result<Vector> {
        check_input("ConventionalRp::apply", self.input_dim(), x)?;
        let mut y = vec![0.0; self.output_dim()];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.matrix.row(i), &mut y);
            }
        }
        y.iter_mut().for_each(|v| *v *= self.scale);
        Ok(Vector::new(y))
    }

    fn storage_count(&self) -> usize {
        self.matrix.rows() * self.matrix.cols()
    }
}

/// Nonzero of a sparse sign factor column: flat offset `row·stride` and sign.
#[derive(Debug, Clone, Copy)]
struct SignEntry {
    offset: usize,
    negative: bool,
}

/// Sign-pattern view of all-sparse factors, `columns[n][j]` listing the
/// nonzeros of column `j` of factor `n`.
#[derive(Debug, Clone)]
struct SignPattern {
    columns: Vec<Vec<Vec<SignEntry>>>,
    magnitude: f64,
}

/// Tensor random projection `x ↦ (1/√k)·(A₁ ⊙ ⋯ ⊙ A_N)ᵀ x`.
///
/// Factor `Aᵢ` is `dᵢ × k`; the input dimension is `d = ∏dᵢ`. Only the
/// factors are stored (`k·Σdᵢ` scalars). [`Projection::apply`] never forms
/// the `d × k` product.
#[derive(Debug, Clone)]
pub struct TensorRandomProjection {
    dims: Vec<usize>,
    k: usize,
    factors: Vec<DenseMatrix>,
    dists: Vec<EntryDistribution>,
    scale: f64,
    signs: Option<SignPattern>,
}

impl TensorRandomProjection {
    /// Builds a TRP with every factor drawn from `dist`. Factor `i` (0-based)
    /// uses the stream `seed.derive(i)`.
    pub fn build(dims: &[usize], k: usize, dist: EntryDistribution, seed: &SeedSpec) -> Result<Self> {
        Self::build_per_factor(dims, k, &vec![dist; dims.len()], seed)
    }

    /// Builds a TRP whose factors resolve their law from `family`.
    pub fn build_family(dims: &[usize], k: usize, family: DistFamily, seed: &SeedSpec) -> Result<Self> {
        let dists = dims
            .iter()
            .map(|&d| family.entry_for(d))
            .collect::<Result<Vec<_>>>()?;
        Self::build_per_factor(dims, k, &dists, seed)
    }

    pub fn build_per_factor(
        dims: &[usize],
        k: usize,
        dists: &[EntryDistribution],
        seed: &SeedSpec,
    ) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Argument("TRP needs at least one factor dimension".into()));
        }
        if dists.len() != dims.len() {
            return Err(Error::Dimension {
                op: "TensorRandomProjection::build_per_factor",
                expected: dims.len(),
                got: dists.len(),
            });
        }
        check_range(k)?;
        let factors = dims
            .iter()
            .zip(dists)
            .enumerate()
            .map(|(i, (&d, dist))| sample_matrix(dist, d, k, &seed.derive(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_factors(factors, dists.to_vec())
    }

    /// Wraps explicit factors. Factors declared sparse must hold values in
    /// `{−1/√δ, 0, 1/√δ}`.
    pub fn from_factors(factors: Vec<DenseMatrix>, dists: Vec<EntryDistribution>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::Argument("TRP needs at least one factor".into()))?;
        let k = first.cols();
        check_range(k)?;
        if let Some(bad) = factors.iter().find(|f| f.cols() != k) {
            return Err(Error::Dimension {
                op: "TensorRandomProjection::from_factors",
                expected: k,
                got: bad.cols(),
            });
        }
        if dists.len() != factors.len() {
            return Err(Error::Dimension {
                op: "TensorRandomProjection::from_factors",
                expected: factors.len(),
                got: dists.len(),
            });
        }
        let dims: Vec<usize> = factors.iter().map(DenseMatrix::rows).collect();
        let signs = if dists.iter().all(EntryDistribution::is_sparse) {
            Some(sign_pattern(&factors, &dists, &dims)?)
        } else {
            None
        };
        Ok(Self {
            dims,
            k,
            factors,
            dists,
            scale: 1.0 / (k as f64).sqrt(),
            signs,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn factors(&self) -> &[DenseMatrix] {
        &self.factors
    }

    pub fn dists(&self) -> &[EntryDistribution] {
        &self.dists
    }

    /// Expected fraction of nonzeros in the (implicit) `d × k` matrix:
    /// `∏δᵢ`, which is 1 when any factor is Gaussian.
    pub fn expected_sparsity(&self) -> f64 {
        if self.dists.iter().all(EntryDistribution::is_sparse) {
            self.dists.iter().map(EntryDistribution::delta).product()
        } else {
            1.0
        }
    }

    /// The unscaled `d × k` matrix `A₁ ⊙ ⋯ ⊙ A_N`, capped at [`MATERIALIZE_CAP`] entries.
    pub fn materialize(&self) -> Result<DenseMatrix> {
        self.materialize_capped(MATERIALIZE_CAP)
    }

    pub fn materialize_capped(&self, cap: usize) -> Result<DenseMatrix> {
        let requested = self.input_dim().saturating_mul(self.k);
        if requested > cap {
            return Err(Error::Resource { requested, cap });
        }
        khatri_rao_all(&self.factors)
    }

    /// Dense-factor contraction. The last mode is contracted for all `k`
    /// columns at once; each output coordinate then folds the remaining modes
    /// against its factor columns, last to first.
    fn apply_dense(&self, x: &[f64]) -> Vec<f64> {
        let k = self.k;
        let n = self.factors.len();
        let last = &self.factors[n - 1];
        let d_last = last.rows();
        let rest = x.len() / d_last;

        // partial[j·rest + l] = Σ_i x[l·d_last + i]·A_N[i, j]
        let mut partial = vec![0.0; rest * k];
        let mut row = vec![0.0; k];
        for l in 0..rest {
            row.iter_mut().for_each(|v| *v = 0.0);
            for (i, &xi) in x[l * d_last..(l + 1) * d_last].iter().enumerate() {
                if xi != 0.0 {
                    axpy(xi, last.row(i), &mut row);
                }
            }
            for (j, &v) in row.iter().enumerate() {
                partial[j * rest + l] = v;
            }
        }
        if n == 1 {
            return partial;
        }

        let mut out = vec![0.0; k];
        let mut buf = vec![0.0; rest];
        let mut col = Vec::new();
        for (j, out_j) in out.iter_mut().enumerate() {
            let mut len = rest;
            buf[..len].copy_from_slice(&partial[j * rest..(j + 1) * rest]);
            for factor in self.factors[..n - 1].iter().rev() {
                let dm = factor.rows();
                col.clear();
                col.extend((0..dm).map(|i| factor.get(i, j)));
                let next = len / dm;
                for l in 0..next {
                    buf[l] = dot(&buf[l * dm..(l + 1) * dm], &col);
                }
                len = next;
            }
            debug_assert_eq!(len, 1);
            *out_j = buf[0];
        }
        out
    }

    /// All-sparse path: nonzero index lists and sign accumulation, one final
    /// scaling by `∏(1/√δᵢ)`.
    fn apply_signs(&self, signs: &SignPattern, x: &[f64]) -> Vec<f64> {
        let mut levels: Vec<&[SignEntry]> = Vec::with_capacity(self.factors.len());
        (0..self.k)
            .map(|j| {
                levels.clear();
                levels.extend(signs.columns.iter().map(|f| f[j].as_slice()));
                signs.magnitude * signed_sum(&levels, x, 0)
            })
            .collect()
    }
}

fn sign_pattern(
    factors: &[DenseMatrix],
    dists: &[EntryDistribution],
    dims: &[usize],
) -> Result<SignPattern> {
    let strides = crate::linalg::strides(dims);
    let mut magnitude = 1.0;
    let mut columns = Vec::with_capacity(factors.len());
    for ((factor, dist), stride) in factors.iter().zip(dists).zip(strides) {
        let s = 1.0 / dist.delta().sqrt();
        magnitude *= s;
        let mut per_col = vec![Vec::new(); factor.cols()];
        for i in 0..factor.rows() {
            for (j, &v) in factor.row(i).iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                if (v.abs() - s).abs() > 1e-12 * s {
                    return Err(Error::Input(format!(
                        "sparse sign factor holds {v}, expected 0 or ±{s}"
                    )));
                }
                per_col[j].push(SignEntry {
                    offset: i * stride,
                    negative: v < 0.0,
                });
            }
        }
        columns.push(per_col);
    }
    Ok(SignPattern { columns, magnitude })
}

fn signed_sum(levels: &[&[SignEntry]], x: &[f64], base: usize) -> f64 {
    match levels {
        [] => x[base],
        [leaf] => leaf.iter().fold(0.0, |acc, e| {
            let v = x[base + e.offset];
            if e.negative {
                acc - v
            } else {
                acc + v
            }
        }),
        [first, rest @ ..] => first.iter().fold(0.0, |acc, e| {
            let v = signed_sum(rest, x, base + e.offset);
            if e.negative {
                acc - v
            } else {
                acc + v
            }
        }),
    }
}

impl Projection for TensorRandomProjection {
    fn input_dim(&self) -> usize {
        self.dims.iter().product()
    }

    fn output_dim(&self) -> usize {
        self.k
    }

    fn apply(&self, x: &[f64]) -> Result<Vector> {
        check_input("TensorRandomProjection::apply", self.input_dim(), x)?;
        let mut y = match &self.signs {
            Some(signs) => self.apply_signs(signs, x),
            None => self.apply_dense(x),
        };
        y.iter_mut().for_each(|v| *v *= self.scale);
        Ok(Vector::new(y))
    }

    fn storage_count(&self) -> usize {
        self.k * self.dims.iter().sum::<usize>()
    }
}

/// `T` independent TRPs combined as `(1/√T)·Σₜ f⁽ᵗ⁾(x)`.
#[derive(Debug, Clone)]
pub struct TrpEnsemble {
    replicates: Vec<TensorRandomProjection>,
}

impl TrpEnsemble {
    /// Replicate `t` (0-based) uses `seed.derive(t)`; its factors then derive
    /// one level further.
    pub fn build(
        dims: &[usize],
        k: usize,
        replicates: usize,
        family: DistFamily,
        seed: &SeedSpec,
    ) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::Argument("ensemble needs at least one replicate".into()));
        }
        let replicates = (0..replicates)
            .map(|t| TensorRandomProjection::build_family(dims, k, family, &seed.derive(t as u64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { replicates })
    }

    pub fn from_replicates(replicates: Vec<TensorRandomProjection>) -> Result<Self> {
        let first = replicates
            .first()
            .ok_or_else(|| Error::Argument("ensemble needs at least one replicate".into()))?;
        if replicates
            .iter()
            .any(|r| r.dims() != first.dims() || r.k() != first.k())
        {
            return Err(Error::Argument("ensemble replicates must share dims and k".into()));
        }
        Ok(Self { replicates })
    }

    pub fn replicates(&self) -> &[TensorRandomProjection] {
        &self.replicates
    }

    pub fn len(&self) -> usize {
        self.replicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicates.is_empty()
    }
}

impl Projection for TrpEnsemble {
    fn input_dim(&self) -> usize {
        self.replicates[0].input_dim()
    }

    fn output_dim(&self) -> usize {
        self.replicates[0].k()
    }

    fn apply(&self, x: &[f64]) -> Result<Vector> {
        check_input("TrpEnsemble::apply", self.input_dim(), x)?;
        let mut y = vec![0.0; self.output_dim()];
        for r in &self.replicates {
            axpy(1.0, &r.apply(x)?, &mut y);
        }
        let s = 1.0 / (self.replicates.len() as f64).sqrt();
        y.iter_mut().for_each(|v| *v *= s);
        Ok(Vector::new(y))
    }

    fn storage_count(&self) -> usize {
        self.replicates.iter().map(Projection::storage_count).sum()
    }
}

/// A fixed matrix applied as `scale·Mᵀx`; holds no random scalars. Used as
/// an oracle and as the identity map in debug runs.
#[derive(Debug, Clone)]
pub struct ExplicitMap {
    matrix: DenseMatrix,
    scale: f64,
}

impl ExplicitMap {
    pub fn new(matrix: DenseMatrix, scale: f64) -> Self {
        Self { matrix, scale }
    }

    pub fn identity(d: usize) -> Self {
        Self::new(DenseMatrix::identity(d), 1.0)
    }
}

impl Projection for ExplicitMap {
    fn input_dim(&self) -> usize {
        self.matrix.rows()
    }

    fn output_dim(&self) -> usize {
        self.matrix.cols()
    }

    fn apply(&self, x: &[f64]) -> Result<Vector> {
        check_input("ExplicitMap::apply", self.input_dim(), x)?;
        let mut y = vec![0.0; self.output_dim()];
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi * self.scale, self.matrix.row(i), &mut y);
            }
        }
        Ok(Vector::new(y))
    }

    fn storage_count(&self) -> usize {
        0
    }
}

/// Which construction a [`MapSpec`] builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    /// Conventional `d × k` random matrix.
    Rp,
    /// Single tensor random projection.
    Trp,
    /// Ensemble of `T` independent TRPs.
    TrpEnsemble { replicates: usize },
    /// Identity (requires `k = d`); debug only.
    Identity,
}

impl MapKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rp => "rp",
            Self::Trp => "trp",
            Self::TrpEnsemble { .. } => "trp_t",
            Self::Identity => "identity",
        }
    }

    /// The ensemble size `T` (1 for single maps).
    pub fn replicates(&self) -> usize {
        match *self {
            Self::TrpEnsemble { replicates } => replicates,
            _ => 1,
        }
    }
}

/// Everything needed to draw a fresh map from a seed.
#[derive(Debug, Clone, PartialEq)]
pub struct MapSpec {
    pub kind: MapKind,
    pub dims: Vec<usize>,
    pub k: usize,
    pub family: DistFamily,
}

impl MapSpec {
    pub fn new(kind: MapKind, dims: Vec<usize>, k: usize, family: DistFamily) -> Self {
        Self { kind, dims, k, family }
    }

    pub fn input_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn build(&self, seed: &SeedSpec) -> Result<AnyMap> {
        let d = self.input_dim();
        Ok(match self.kind {
            MapKind::Rp => {
                AnyMap::Rp(ConventionalRp::build(d, self.k, self.family.entry_for(d)?, seed)?)
            }
            MapKind::Trp => AnyMap::Trp(TensorRandomProjection::build_family(
                &self.dims,
                self.k,
                self.family,
                seed,
            )?),
            MapKind::TrpEnsemble { replicates } => AnyMap::Ensemble(TrpEnsemble::build(
                &self.dims,
                self.k,
                replicates,
                self.family,
                seed,
            )?),
            MapKind::Identity => {
                if self.k != d {
                    return Err(Error::Argument(format!(
                        "identity map needs k = d, got k = {} and d = {d}",
                        self.k
                    )));
                }
                AnyMap::Explicit(ExplicitMap::identity(d))
            }
        })
    }
}

/// Any of the supported maps.
#[derive(Debug, Clone)]
pub enum AnyMap {
    Rp(ConventionalRp),
    Trp(TensorRandomProjection),
    Ensemble(TrpEnsemble),
    Explicit(ExplicitMap),
}

impl AnyMap {
    fn inner(&self) -> &dyn Projection {
        match self {
            Self::Rp(m) => m,
            Self::Trp(m) => m,
            Self::Ensemble(m) => m,
            Self::Explicit(m) => m,
        }
    }
}

impl Projection for AnyMap {
    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn output_dim(&self) -> usize {
        self.inner().output_dim()
    }

    fn apply(&self, x: &[f64]) -> Result<Vector> {
        self.inner().apply(x)
    }

    fn storage_count(&self) -> usize {
        self.inner().storage_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::kron_vec;

    fn gaussian_trp(dims: &[usize], k: usize, seed: u64) -> TensorRandomProjection {
        TensorRandomProjection::build(dims, k, EntryDistribution::Gaussian, &SeedSpec::new(seed)).unwrap()
    }

    fn test_vector(d: usize, phase: f64) -> Vec<f64> {
        (0..d).map(|i| ((i as f64 + 1.0) * phase).sin()).collect()
    }

    // (1/√k)·materialize(map)ᵀx computed entry by entry.
    fn dense_oracle(map: &TensorRandomProjection, x: &[f64]) -> Vec<f64> {
        let m = map.materialize().unwrap();
        let s = 1.0 / (map.k() as f64).sqrt();
        (0..map.k())
            .map(|j| s * (0..m.rows()).map(|i| m.get(i, j) * x[i]).sum::<f64>())
            .collect()
    }

    fn rel_err(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    #[test]
    fn build_shapes_and_storage() {
        let map = gaussian_trp(&[50, 50], 10, 1);
        assert_eq!(map.factors().len(), 2);
        assert!(map.factors().iter().all(|f| f.shape() == (50, 10)));
        assert_eq!(map.storage_count(), 1000);
        assert_eq!(gaussian_trp(&[200, 200], 10, 1).storage_count(), 4000);
    }

    #[test]
    fn build_is_deterministic() {
        let a = gaussian_trp(&[3, 4, 5], 4, 99);
        let b = gaussian_trp(&[3, 4, 5], 4, 99);
        assert_eq!(a.factors(), b.factors());
        let c = gaussian_trp(&[3, 4, 5], 4, 100);
        assert_ne!(a.factors(), c.factors());
    }

    #[test]
    fn empty_dims_rejected() {
        let err = TensorRandomProjection::build(&[], 3, EntryDistribution::Gaussian, &SeedSpec::new(0));
        assert!(matches!(err, Err(Error::Argument(_))));
        let err = TensorRandomProjection::build(&[3], 0, EntryDistribution::Gaussian, &SeedSpec::new(0));
        assert!(matches!(err, Err(Error::Argument(_))));
    }

    #[test]
    fn order_one_is_conventional() {
        let seed = SeedSpec::new(4);
        let trp = TensorRandomProjection::build(&[30], 6, EntryDistribution::Gaussian, &seed).unwrap();
        let rp = ConventionalRp::build(30, 6, EntryDistribution::Gaussian, &seed.derive(0)).unwrap();
        assert_eq!(trp.factors()[0], *rp.matrix());
        assert_eq!(trp.storage_count(), rp.storage_count());
        let x = test_vector(30, 0.3);
        assert_eq!(trp.apply(&x).unwrap(), rp.apply(&x).unwrap());
        assert_eq!(trp.materialize().unwrap(), *rp.matrix());
    }

    #[test]
    fn apply_zero_and_length_mismatch() {
        let map = gaussian_trp(&[4, 5], 3, 2);
        assert!(map.apply(&[0.0; 20]).unwrap().iter().all(|&v| v == 0.0));
        assert!(matches!(map.apply(&[0.0; 19]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn apply_hand_example() {
        let a1 = DenseMatrix::from_rows(&[[1.0], [1.0]]).unwrap();
        let a2 = DenseMatrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        let map = TensorRandomProjection::from_factors(
            vec![a1, a2],
            vec![EntryDistribution::Gaussian; 2],
        )
        .unwrap();
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(dense_oracle(&map, &x), vec![-2.0]);
        assert_eq!(map.apply(&x).unwrap().as_slice(), &[-2.0]);
    }

    #[test]
    fn sparse_path_matches_dense_oracle() {
        let dist = EntryDistribution::sparse_sign(1.0 / 3.0).unwrap();
        for (s, dims) in [vec![6], vec![4, 5], vec![3, 4, 5], vec![2, 3, 4, 5]].iter().enumerate() {
            let map = TensorRandomProjection::build(dims, 3, dist, &SeedSpec::new(s as u64)).unwrap();
            assert!(map.signs.is_some());
            let x = test_vector(map.input_dim(), 0.7);
            let y = map.apply(&x).unwrap();
            assert!(rel_err(&y, &dense_oracle(&map, &x)) <= 1e-12);
        }
    }

    #[test]
    fn materialize_columns_are_kron_of_factor_columns() {
        let map = gaussian_trp(&[3, 4, 5], 2, 8);
        let m = map.materialize().unwrap();
        assert_eq!(m.shape(), (60, 2));
        for j in 0..2 {
            let cols: Vec<Vector> = map.factors().iter().map(|f| f.column(j)).collect();
            assert_eq!(m.column(j), kron_vec(&cols).unwrap());
        }
        // Entry (r, j) is ∏ₙ Aₙ(rₙ, j).
        for lin in 1..=60 {
            let r = crate::linalg::linear_to_multi_index(lin, &[3, 4, 5]).unwrap();
            for j in 0..2 {
                let prod: f64 = map
                    .factors()
                    .iter()
                    .zip(&r)
                    .map(|(f, &rn)| f.get(rn - 1, j))
                    .product();
                assert_eq!(m.get(lin - 1, j), prod);
            }
        }
    }

    #[test]
    fn materialize_cap() {
        let map = gaussian_trp(&[10, 10], 5, 0);
        assert!(matches!(
            map.materialize_capped(499),
            Err(Error::Resource { requested: 500, cap: 499 })
        ));
        assert!(map.materialize_capped(500).is_ok());
    }

    #[test]
    fn ensemble_of_one_equals_replicate() {
        let seed = SeedSpec::new(12);
        let ens = TrpEnsemble::build(&[4, 5], 3, 1, DistFamily::Gaussian, &seed).unwrap();
        let x = test_vector(20, 0.9);
        assert_eq!(ens.apply(&x).unwrap(), ens.replicates()[0].apply(&x).unwrap());
        assert!(ens.apply(&[0.0; 20]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ensemble_is_scaled_sum() {
        let ens = TrpEnsemble::build(&[4, 5], 3, 5, DistFamily::Gaussian, &SeedSpec::new(3)).unwrap();
        let x = test_vector(20, 1.1);
        let mut sum = vec![0.0; 3];
        for r in ens.replicates() {
            for (s, v) in sum.iter_mut().zip(r.apply(&x).unwrap().iter()) {
                *s += v;
            }
        }
        let y = ens.apply(&x).unwrap();
        for (a, b) in y.iter().zip(&sum) {
            assert!((a - b / 5f64.sqrt()).abs() <= 1e-12 * b.abs().max(1.0));
        }
        assert_eq!(ens.storage_count(), 5 * 3 * 9);
    }

    #[test]
    fn storage_ratio_trp5_vs_dense() {
        let seed = SeedSpec::new(0);
        let ens = TrpEnsemble::build(&[200, 200], 10, 5, DistFamily::Gaussian, &seed).unwrap();
        let spec = MapSpec::new(MapKind::Rp, vec![200, 200], 10, DistFamily::Gaussian);
        let rp_storage = 10 * spec.input_dim();
        assert_eq!(ens.storage_count() * 20, rp_storage);
    }

    #[test]
    fn expected_sparsity_values() {
        let third = EntryDistribution::sparse_sign(1.0 / 3.0).unwrap();
        let m = TensorRandomProjection::build(&[10, 10], 2, third, &SeedSpec::new(0)).unwrap();
        assert!((m.expected_sparsity() - 1.0 / 9.0).abs() < 1e-15);
        let m = TensorRandomProjection::build(&[10], 2, third, &SeedSpec::new(0)).unwrap();
        assert!((m.expected_sparsity() - 1.0 / 3.0).abs() < 1e-15);
        let vs = TensorRandomProjection::build_family(&[50, 50], 2, DistFamily::VerySparse, &SeedSpec::new(0))
            .unwrap();
        assert!((vs.expected_sparsity() - 1.0 / 50.0).abs() < 1e-15);
        assert_eq!(gaussian_trp(&[5, 5], 2, 0).expected_sparsity(), 1.0);
    }

    #[test]
    fn from_factors_validation() {
        let a = DenseMatrix::zeros(3, 2);
        let b = DenseMatrix::zeros(4, 3);
        assert!(TensorRandomProjection::from_factors(
            vec![a.clone(), b],
            vec![EntryDistribution::Gaussian; 2]
        )
        .is_err());
        let bad = DenseMatrix::from_rows(&[[0.5, 0.0]]).unwrap();
        assert!(TensorRandomProjection::from_factors(
            vec![bad],
            vec![EntryDistribution::sparse_sign(0.25).unwrap()]
        )
        .is_err());
    }

    #[test]
    fn identity_spec_requires_square() {
        let spec = MapSpec::new(MapKind::Identity, vec![2, 3], 5, DistFamily::Gaussian);
        assert!(spec.build(&SeedSpec::new(0)).is_err());
        let spec = MapSpec::new(MapKind::Identity, vec![2, 3], 6, DistFamily::Gaussian);
        let x = test_vector(6, 0.4);
        assert_eq!(spec.build(&SeedSpec::new(0)).unwrap().apply(&x).unwrap().as_slice(), &x[..]);
    }
}
