//! Feasible sets, distance-generating functions and the maps they induce.
//!
//! A [`Geometry`] pairs a [`ProductSet`] with one distance-generating function
//! (DGF) per block. Two DGFs are supported:
//!
//! * [`Dgf::Euclidean`]: `h(x) = ½‖x‖²`, 1-strongly convex in the L2 norm, on any block.
//!   Its prox-mapping is the Euclidean projection of `x + y`.
//! * [`Dgf::Entropy`]: `h(x) = Σ x_j log x_j`, 1-strongly convex in the L1 norm, on simplex
//!   blocks only. Its prox-mapping is the multiplicative-weights update.
//!
//! Norms on a product combine blockwise as a root-sum-of-squares. Entropy blocks measure
//! primal vectors in L1 and dual vectors in L∞; Euclidean blocks use L2 for both.

use std::ops::{Deref, DerefMut, Range};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};

/// Tolerance for membership tests of primal points.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

macro_rules! vector_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub Vec<f64>);

        impl $name {
            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl From<&[f64]> for $name {
            fn from(v: &[f64]) -> Self {
                Self(v.to_vec())
            }
        }

        impl<const N: usize> From<[f64; N]> for $name {
            fn from(v: [f64; N]) -> Self {
                Self(v.to_vec())
            }
        }
    };
}

vector_newtype!(
    /// A point of the primal space, usually a member of the feasible set.
    PrimalPoint
);
vector_newtype!(
    /// A vector of the dual space (gradients, scaled steps).
    DualVector
);

/// One primitive convex constraint block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum FeasibleBlock {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Simplex { dim: usize },
}

impl FeasibleBlock {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let block = FeasibleBlock::Box { lower, upper };
        block.validate()?;
        Ok(block)
    }

    /// The box `[lower, upper]^dim`.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(vec![lower; dim], vec![upper; dim])
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let block = FeasibleBlock::Ball { center, radius };
        block.validate()?;
        Ok(block)
    }

    pub fn simplex(dim: usize) -> Result<Self> {
        let block = FeasibleBlock::Simplex { dim };
        block.validate()?;
        Ok(block)
    }

    fn validate(&self) -> Result<()> {
        match self {
            FeasibleBlock::Box { lower, upper } => {
                check_len(lower.len(), upper.len())?;
                if lower.is_empty() {
                    return Err(Error::Config("box block must have dimension ≥ 1".into()));
                }
                check_finite(lower, "box lower bound")?;
                check_finite(upper, "box upper bound")?;
                if lower.iter().zip(upper).any(|(l, u)| l >= u) {
                    return Err(Error::Config("box block needs lower < upper in every coordinate".into()));
                }
            }
            FeasibleBlock::Ball { center, radius } => {
                if center.is_empty() {
                    return Err(Error::Config("ball block must have dimension ≥ 1".into()));
                }
                check_finite(center, "ball center")?;
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Config(format!("ball radius must be positive, got {radius}")));
                }
            }
            FeasibleBlock::Simplex { dim } => {
                if *dim == 0 {
                    return Err(Error::Config("simplex dimension must be ≥ 1".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleBlock::Box { lower, .. } => lower.len(),
            FeasibleBlock::Ball { center, .. } => center.len(),
            FeasibleBlock::Simplex { dim } => *dim,
        }
    }

    pub fn is_simplex(&self) -> bool {
        matches!(self, FeasibleBlock::Simplex { .. })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            FeasibleBlock::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (l, u))| *v >= l - tol && *v <= u + tol),
            FeasibleBlock::Ball { center, radius } => l2_dist(x, center) <= radius + tol,
            FeasibleBlock::Simplex { .. } => {
                x.iter().all(|v| *v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol
            }
        }
    }

    /// Euclidean projection onto the block.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            FeasibleBlock::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.clamp(*l, *u))
                .collect(),
            FeasibleBlock::Ball { center, radius } => {
                let dist = l2_dist(x, center);
                if dist <= *radius {
                    x.to_vec()
                } else {
                    let scale = radius / dist;
                    x.iter().zip(center).map(|(v, c)| c + (v - c) * scale).collect()
                }
            }
            FeasibleBlock::Simplex { .. } => project_simplex(x),
        }
    }

    /// Box/ball center, or the barycenter of the simplex.
    pub fn center(&self) -> Vec<f64> {
        match self {
            FeasibleBlock::Box { lower, upper } => {
                lower.iter().zip(upper).map(|(l, u)| 0.5 * (l + u)).collect()
            }
            FeasibleBlock::Ball { center, .. } => center.clone(),
            FeasibleBlock::Simplex { dim } => vec![1.0 / *dim as f64; *dim],
        }
    }

    /// Uniform sample from the block.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            FeasibleBlock::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| l + (u - l) * rng.random::<f64>())
                .collect(),
            FeasibleBlock::Ball { center, radius } => {
                let d = center.len();
                let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
                let norm = l2_norm(&dir).max(f64::MIN_POSITIVE);
                let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
                center.iter().zip(&dir).map(|(c, u)| c + r * u / norm).collect()
            }
            FeasibleBlock::Simplex { dim } => {
                let e: Vec<f64> = (0..*dim).map(|_| Exp1.sample(rng)).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|v| v / s).collect()
            }
        }
    }

    /// Extreme points for boxes and simplices; axis endpoints for balls.
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            FeasibleBlock::Box { lower, upper } => {
                let d = lower.len();
                (0..1usize << d.min(20))
                    .map(|mask| {
                        (0..d)
                            .map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] })
                            .collect()
                    })
                    .collect()
            }
            FeasibleBlock::Ball { center, radius } => {
                let mut out = Vec::with_capacity(2 * center.len());
                for i in 0..center.len() {
                    for s in [-1.0, 1.0] {
                        let mut p = center.clone();
                        p[i] += s * radius;
                        out.push(p);
                    }
                }
                out
            }
            FeasibleBlock::Simplex { dim } => (0..*dim)
                .map(|i| (0..*dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Which player owns a block: player 1 minimizes, player 2 maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct OwnedBlock {
    player: Player,
    block: FeasibleBlock,
}

/// The feasible set `X = X1 × X2` as an ordered product of blocks, each owned by one player.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<OwnedBlock>", into = "Vec<OwnedBlock>")]
pub struct ProductSet {
    blocks: Vec<FeasibleBlock>,
    owners: Vec<Player>,
    offsets: Vec<usize>,
}

impl ProductSet {
    pub fn new(blocks: Vec<(FeasibleBlock, Player)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Config("product set needs at least one block".into()));
        }
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut dim = 0;
        let mut owners = Vec::with_capacity(blocks.len());
        let mut out = Vec::with_capacity(blocks.len());
        for (block, player) in blocks {
            block.validate()?;
            offsets.push(dim);
            dim += block.dim();
            owners.push(player);
            out.push(block);
        }
        offsets.push(dim);
        Ok(Self { blocks: out, owners, offsets })
    }

    /// `X1 × X2` with one block per player.
    pub fn two_player(min_block: FeasibleBlock, max_block: FeasibleBlock) -> Result<Self> {
        Self::new(vec![(min_block, Player::Min), (max_block, Player::Max)])
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().expect("offsets are never empty")
    }

    pub fn blocks(&self) -> &[FeasibleBlock] {
        &self.blocks
    }

    pub fn owner(&self, block: usize) -> Player {
        self.owners[block]
    }

    pub fn block_range(&self, block: usize) -> Range<usize> {
        self.offsets[block]..self.offsets[block + 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FeasibleBlock, Player, Range<usize>)> + '_ {
        self.blocks
            .iter()
            .enumerate()
            .map(move |(i, b)| (b, self.owners[i], self.block_range(i)))
    }

    /// Coordinates owned by `player`, in block order.
    pub fn player_coordinates(&self, player: Player) -> Vec<usize> {
        self.iter()
            .filter(|(_, p, _)| *p == player)
            .flat_map(|(_, _, r)| r)
            .collect()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim() && self.iter().all(|(b, _, r)| b.contains(&x[r], tol))
    }

    pub fn project(&self, x: &[f64]) -> Result<PrimalPoint> {
        check_len(self.dim(), x.len())?;
        let mut out = Vec::with_capacity(x.len());
        for (b, _, r) in self.iter() {
            out.extend(b.project(&x[r]));
        }
        Ok(PrimalPoint(out))
    }

    pub fn center(&self) -> PrimalPoint {
        PrimalPoint(self.blocks.iter().flat_map(|b| b.center()).collect())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PrimalPoint {
        PrimalPoint(self.blocks.iter().flat_map(|b| b.sample(rng)).collect())
    }

    /// Cartesian product of block vertices, or `None` when there would be more than `limit`.
    pub fn vertices(&self, limit: usize) -> Option<Vec<PrimalPoint>> {
        let per_block: Vec<Vec<Vec<f64>>> = self.blocks.iter().map(|b| b.vertices()).collect();
        let count = per_block
            .iter()
            .try_fold(1usize, |acc, v| acc.checked_mul(v.len()))?;
        if count > limit {
            return None;
        }
        let mut out = vec![Vec::with_capacity(self.dim())];
        for verts in &per_block {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    verts.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.extend_from_slice(v);
                        p
                    })
                })
                .collect();
        }
        Some(out.into_iter().map(PrimalPoint).collect())
    }
}

impl TryFrom<Vec<OwnedBlock>> for ProductSet {
    type Error = Error;
    fn try_from(raw: Vec<OwnedBlock>) -> Result<Self> {
        Self::new(raw.into_iter().map(|b| (b.block, b.player)).collect())
    }
}

impl From<ProductSet> for Vec<OwnedBlock> {
    fn from(set: ProductSet) -> Self {
        set.blocks
            .into_iter()
            .zip(set.owners)
            .map(|(block, player)| OwnedBlock { player, block })
            .collect()
    }
}

/// Distance-generating function attached to a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dgf {
    /// `½‖x‖²`
    Euclidean,
    /// `Σ x_j log x_j`, simplex blocks only.
    Entropy,
}

impl Dgf {
    /// Strong convexity modulus with respect to the block's primal norm.
    pub fn modulus(self) -> f64 {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RawGeometry {
    set: ProductSet,
    dgfs: Vec<Dgf>,
}

/// A product set together with a DGF per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGeometry", into = "RawGeometry")]
pub struct Geometry {
    set: ProductSet,
    dgfs: Vec<Dgf>,
}

impl TryFrom<RawGeometry> for Geometry {
    type Error = Error;
    fn try_from(raw: RawGeometry) -> Result<Self> {
        Geometry::new(raw.set, raw.dgfs)
    }
}

impl From<Geometry> for RawGeometry {
    fn from(g: Geometry) -> Self {
        RawGeometry { set: g.set, dgfs: g.dgfs }
    }
}

impl Geometry {
    pub fn new(set: ProductSet, dgfs: Vec<Dgf>) -> Result<Self> {
        check_len(set.blocks().len(), dgfs.len())?;
        for (block, dgf) in set.blocks().iter().zip(&dgfs) {
            if *dgf == Dgf::Entropy && !block.is_simplex() {
                return Err(Error::Config("negative entropy is only attachable to simplex blocks".into()));
            }
        }
        Ok(Self { set, dgfs })
    }

    /// Euclidean DGF on every block.
    pub fn euclidean(set: ProductSet) -> Self {
        let dgfs = vec![Dgf::Euclidean; set.blocks().len()];
        Self { set, dgfs }
    }

    /// Negative entropy on simplex blocks, Euclidean elsewhere.
    pub fn entropic(set: ProductSet) -> Self {
        let dgfs = set
            .blocks()
            .iter()
            .map(|b| if b.is_simplex() { Dgf::Entropy } else { Dgf::Euclidean })
            .collect();
        Self { set, dgfs }
    }

    /// Builds a geometry from its short name (`euclidean` or `entropic`).
    pub fn by_name(name: &str, set: ProductSet) -> Result<Self> {
        match name {
            "euclidean" => Ok(Self::euclidean(set)),
            "entropic" | "entropy" => Ok(Self::entropic(set)),
            other => Err(Error::Config(format!("unknown geometry `{other}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        if self.dgfs.iter().all(|d| *d == Dgf::Euclidean) {
            "euclidean"
        } else if self.dgfs.iter().all(|d| *d == Dgf::Entropy) {
            "entropic"
        } else {
            "mixed"
        }
    }

    pub fn set(&self) -> &ProductSet {
        &self.set
    }

    pub fn dgfs(&self) -> &[Dgf] {
        &self.dgfs
    }

    pub fn dim(&self) -> usize {
        self.set.dim()
    }

    /// Aggregate strong convexity modulus: the smallest block modulus.
    pub fn modulus(&self) -> f64 {
        self.dgfs.iter().map(|d| d.modulus()).fold(f64::INFINITY, f64::min)
    }

    /// Default starting point: barycenter of simplex blocks, center of boxes and balls.
    pub fn initial_point(&self) -> PrimalPoint {
        self.set.center()
    }

    fn blocks(&self) -> impl Iterator<Item = (Dgf, Range<usize>)> + '_ {
        self.dgfs
            .iter()
            .enumerate()
            .map(move |(i, d)| (*d, self.set.block_range(i)))
    }

    fn check_interior(&self, x: &[f64], what: &str) -> Result<()> {
        for (dgf, r) in self.blocks() {
            if dgf == Dgf::Entropy && x[r].iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Domain(format!(
                    "{what} has a non-positive coordinate on an entropy block"
                )));
            }
        }
        Ok(())
    }

    /// Value of the DGF.
    pub fn h(&self, x: &[f64]) -> Result<f64> {
        check_len(self.dim(), x.len())?;
        check_finite(x, "point")?;
        let mut total = 0.0;
        for (dgf, r) in self.blocks() {
            total += match dgf {
                Dgf::Euclidean => 0.5 * x[r].iter().map(|v| v * v).sum::<f64>(),
                Dgf::Entropy => {
                    if x[r.clone()].iter().any(|v| *v < 0.0) {
                        return Err(Error::Domain("negative coordinate on an entropy block".into()));
                    }
                    x[r].iter().map(|&v| xlogx(v)).sum::<f64>()
                }
            };
        }
        Ok(total)
    }

    /// Gradient of the DGF at a point of its subdifferential domain.
    pub fn grad_dgf(&self, x: &[f64]) -> Result<DualVector> {
        check_len(self.dim(), x.len())?;
        check_finite(x, "point")?;
        self.check_interior(x, "point")?;
        let mut out = x.to_vec();
        for (dgf, r) in self.blocks() {
            if dgf == Dgf::Entropy {
                for v in &mut out[r] {
                    *v = 1.0 + v.ln();
                }
            }
        }
        Ok(DualVector(out))
    }

    /// Bregman divergence `D(base, point) = h(base) − h(point) − ⟨∇h(point), base − point⟩`.
    pub fn bregman(&self, base: &[f64], point: &[f64]) -> Result<f64> {
        check_len(self.dim(), base.len())?;
        check_len(self.dim(), point.len())?;
        check_finite(base, "base")?;
        check_finite(point, "point")?;
        self.check_interior(point, "point")?;
        let mut total = 0.0;
        for (dgf, r) in self.blocks() {
            let (b, p) = (&base[r.clone()], &point[r]);
            total += match dgf {
                Dgf::Euclidean => 0.5 * sq_dist(b, p),
                Dgf::Entropy => {
                    let mut kl = 0.0;
                    for (&bj, &pj) in b.iter().zip(p) {
                        if bj < 0.0 {
                            return Err(Error::Domain("negative base coordinate on an entropy block".into()));
                        }
                        // bj·log(bj/pj) − bj + pj, with 0·log 0 = 0
                        kl += if bj > 0.0 { bj * (bj / pj).ln() - bj + pj } else { pj };
                    }
                    kl
                }
            };
        }
        Ok(total.max(0.0))
    }

    /// Prox-mapping `argmin_{x'} ⟨dual, base − x'⟩ + D(x', base)`.
    pub fn prox(&self, base: &[f64], dual: &[f64]) -> Result<PrimalPoint> {
        check_len(self.dim(), base.len())?;
        check_len(self.dim(), dual.len())?;
        check_finite(base, "prox base")?;
        check_finite(dual, "dual vector")?;
        self.check_interior(base, "prox base")?;
        let mut out = Vec::with_capacity(base.len());
        for (i, (dgf, r)) in self.blocks().enumerate() {
            let (b, y) = (&base[r.clone()], &dual[r]);
            match dgf {
                Dgf::Euclidean => {
                    let moved: Vec<f64> = b.iter().zip(y).map(|(b, y)| b + y).collect();
                    out.extend(self.set.blocks()[i].project(&moved));
                }
                Dgf::Entropy => {
                    let logits: Vec<f64> = b.iter().zip(y).map(|(b, y)| b.ln() + y).collect();
                    out.extend(softmax(&logits));
                }
            }
        }
        Ok(PrimalPoint(out))
    }

    /// Mirror map `argmax_x ⟨dual, x⟩ − h(x)`.
    pub fn mirror(&self, dual: &[f64]) -> Result<PrimalPoint> {
        check_len(self.dim(), dual.len())?;
        check_finite(dual, "dual vector")?;
        let mut out = Vec::with_capacity(dual.len());
        for (i, (dgf, r)) in self.blocks().enumerate() {
            match dgf {
                Dgf::Euclidean => out.extend(self.set.blocks()[i].project(&dual[r])),
                Dgf::Entropy => out.extend(softmax(&dual[r])),
            }
        }
        Ok(PrimalPoint(out))
    }

    /// Product norm of a primal vector.
    pub fn norm(&self, x: &[f64]) -> f64 {
        self.blocks()
            .map(|(dgf, r)| match dgf {
                Dgf::Euclidean => x[r].iter().map(|v| v * v).sum::<f64>(),
                Dgf::Entropy => x[r].iter().map(|v| v.abs()).sum::<f64>().powi(2),
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Product dual norm of a dual vector.
    pub fn dual_norm(&self, y: &[f64]) -> f64 {
        self.blocks()
            .map(|(dgf, r)| match dgf {
                Dgf::Euclidean => y[r].iter().map(|v| v * v).sum::<f64>(),
                Dgf::Entropy => y[r].iter().fold(0.0f64, |m, v| m.max(v.abs())).powi(2),
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Primal norm of `a − b`.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(a, b)| a - b).collect();
        self.norm(&diff)
    }
}

fn xlogx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.ln()
    }
}

/// Softmax with a max-shift so large logits do not overflow.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|v| v / sum).collect()
}

pub(crate) fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub(crate) fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit_box2() -> Geometry {
        let set = ProductSet::two_player(
            FeasibleBlock::cube(1, -1.0, 1.0).unwrap(),
            FeasibleBlock::cube(1, -1.0, 1.0).unwrap(),
        )
        .unwrap();
        Geometry::euclidean(set)
    }

    fn simplex(d: usize) -> Geometry {
        let set = ProductSet::new(vec![(FeasibleBlock::simplex(d).unwrap(), Player::Min)]).unwrap();
        Geometry::entropic(set)
    }

    #[test]
    fn euclidean_bregman_is_half_squared_distance() {
        let g = unit_box2();
        assert_abs_diff_eq!(g.bregman(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(g.bregman(&[0.3, -0.2], &[0.3, -0.2]).unwrap(), 0.0);
    }

    #[test]
    fn entropic_bregman_with_boundary_base() {
        let g = simplex(2);
        let d = g.bregman(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(d, std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(g.bregman(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
    }

    #[test]
    fn entropic_bregman_rejects_boundary_point() {
        let g = simplex(2);
        assert!(matches!(g.bregman(&[0.5, 0.5], &[1.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(
            g.bregman(&[0.5, 0.5, 0.0], &[0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn box_prox_clips() {
        let g = unit_box2();
        assert_eq!(g.prox(&[0.5, 0.5], &[1.0, 0.0]).unwrap().0, vec![1.0, 0.5]);
        assert_eq!(g.prox(&[0.5, 0.5], &[0.0, 0.0]).unwrap().0, vec![0.5, 0.5]);
    }

    #[test]
    fn entropic_prox_is_multiplicative_weights() {
        let g = simplex(2);
        let p = g.prox(&[0.5, 0.5], &[std::f64::consts::LN_2, 0.0]).unwrap();
        assert_abs_diff_eq!(p[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 1.0 / 3.0, epsilon = 1e-15);
        let base = [0.2, 0.3, 0.5];
        let same = simplex(3).prox(&base, &[0.0; 3]).unwrap();
        for (a, b) in same.iter().zip(base) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn entropic_prox_survives_huge_duals() {
        let g = simplex(3);
        let p = g.prox(&[0.2, 0.3, 0.5], &[1e4, 1e4 - 1.0, -1e4]).unwrap();
        assert!(p.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn prox_rejects_bad_inputs() {
        let g = simplex(2);
        assert!(matches!(g.prox(&[1.0, 0.0], &[0.0, 0.0]), Err(Error::Domain(_))));
        assert!(matches!(g.prox(&[0.5, 0.5], &[f64::NAN, 0.0]), Err(Error::NonFiniteInput(_))));
        assert!(matches!(g.mirror(&[f64::INFINITY, 0.0]), Err(Error::NonFiniteInput(_))));
    }

    #[test]
    fn mirror_examples() {
        let g = simplex(2);
        assert_eq!(g.mirror(&[0.0, 0.0]).unwrap().0, vec![0.5, 0.5]);
        let p = g.mirror(&[std::f64::consts::LN_2, 0.0]).unwrap();
        assert_abs_diff_eq!(p[0], 2.0 / 3.0, epsilon = 1e-15);
        let set = ProductSet::new(vec![(FeasibleBlock::cube(1, -1.0, 1.0).unwrap(), Player::Min)]).unwrap();
        assert_eq!(Geometry::euclidean(set).mirror(&[5.0]).unwrap().0, vec![1.0]);
    }

    #[test]
    fn grad_dgf_examples() {
        let g = unit_box2();
        assert_eq!(g.grad_dgf(&[0.3, -0.2]).unwrap().0, vec![0.3, -0.2]);
        let s = simplex(2);
        let v = s.grad_dgf(&[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(v[0], 1.0 + 0.5f64.ln(), epsilon = 1e-15);
        assert!(matches!(s.grad_dgf(&[1.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn ball_projection() {
        let b = FeasibleBlock::ball(vec![1.0, 0.0], 2.0).unwrap();
        assert_eq!(b.project(&[1.0, 0.0]), vec![1.0, 0.0]);
        let p = b.project(&[5.0, 3.0]);
        assert_abs_diff_eq!(l2_dist(&p, &[1.0, 0.0]), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p[0], 1.0 + 1.6, epsilon = 1e-14);
        assert_abs_diff_eq!(p[1], 1.2, epsilon = 1e-14);
    }

    #[test]
    fn simplex_projection_lands_on_simplex() {
        let p = project_simplex(&[0.9, 0.8, -3.0]);
        assert_abs_diff_eq!(p[0], 0.55, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.45, epsilon = 1e-15);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn block_validation() {
        assert!(FeasibleBlock::boxed(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(FeasibleBlock::ball(vec![0.0], 0.0).is_err());
        assert!(FeasibleBlock::simplex(0).is_err());
        let set = ProductSet::new(vec![(FeasibleBlock::cube(2, 0.0, 1.0).unwrap(), Player::Min)]).unwrap();
        assert!(Geometry::new(set, vec![Dgf::Entropy]).is_err());
    }

    #[test]
    fn product_norms_combine_blockwise() {
        let set = ProductSet::two_player(
            FeasibleBlock::simplex(2).unwrap(),
            FeasibleBlock::cube(2, -1.0, 1.0).unwrap(),
        )
        .unwrap();
        let g = Geometry::entropic(set.clone());
        // L1 of (0.3,-0.4) is 0.7, L2 of (3,4) is 5
        assert_abs_diff_eq!(g.norm(&[0.3, -0.4, 3.0, 4.0]), (0.49f64 + 25.0).sqrt(), epsilon = 1e-14);
        // L∞ of (0.3,-0.4) is 0.4
        assert_abs_diff_eq!(g.dual_norm(&[0.3, -0.4, 3.0, 4.0]), (0.16f64 + 25.0).sqrt(), epsilon = 1e-14);
        assert_eq!(g.name(), "mixed");
        assert_eq!(set.player_coordinates(Player::Max), vec![2, 3]);
        assert_eq!(g.initial_point().0, vec![0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn geometry_serde_round_trip() {
        let set = ProductSet::two_player(
            FeasibleBlock::simplex(3).unwrap(),
            FeasibleBlock::ball(vec![0.0, 1.0], 0.5).unwrap(),
        )
        .unwrap();
        let g = Geometry::entropic(set);
        let json = serde_json::to_string(&g).unwrap();
        let back: Geometry = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
        let bad = json.replace("\"entropy\"", "\"euclidean\"").replacen("\"euclidean\"", "\"entropy\"", 2);
        assert!(serde_json::from_str::<Geometry>(&bad).is_err());
    }
}
