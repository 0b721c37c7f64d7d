//! D-dimensional lattice supergraphs.
//!
//! Nodes are D-tuples `(β_1, …, β_D)` with `0 ≤ β_d < M_d`, numbered `1..=N`
//! in mixed radix with the first dimension least significant:
//! `x = 1 + Σ_d β_d · ∏_{j<d} M_j`. Two nodes are linked when their tuples
//! differ in exactly one position.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest node count for which the supergraph adjacency is materialized as a
/// dense matrix. Larger lattices are available only through [`LatticeSpec::links`].
pub const DENSE_LIMIT: usize = 10_000;

/// Lattice sizes `M_d` and per-dimension link probabilities `p_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSpec {
    dims: Vec<usize>,
    probs: Vec<f64>,
    node_count: usize,
}

impl LatticeSpec {
    pub fn new(dims: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSpec("at least one dimension is required".into()));
        }
        if dims.len() != probs.len() {
            return Err(Error::InvalidSpec(format!(
                "{} dims but {} probabilities",
                dims.len(),
                probs.len()
            )));
        }
        if let Some(d) = dims.iter().position(|&m| m < 2) {
            return Err(Error::InvalidSpec(format!(
                "dimension {} has size {}; every size must be at least 2",
                d + 1,
                dims[d]
            )));
        }
        if let Some(d) = probs.iter().position(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::InvalidSpec(format!(
                "probability {} for dimension {} is outside (0, 1]",
                probs[d],
                d + 1
            )));
        }
        let node_count = dims
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .ok_or_else(|| Error::NodeCountOverflow(dims.clone()))?;
        Ok(Self {
            dims,
            probs,
            node_count,
        })
    }

    /// Same sizes with every probability set to `p`.
    pub fn uniform(dims: Vec<usize>, p: f64) -> Result<Self> {
        let probs = vec![p; dims.len()];
        Self::new(dims, probs)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of lattice dimensions `D`.
    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    /// `N = ∏ M_d`.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Expected node degree `γ = Σ_d p_d (M_d − 1)`.
    pub fn expected_degree(&self) -> f64 {
        self.dims
            .iter()
            .zip(&self.probs)
            .map(|(&m, &p)| p * (m - 1) as f64)
            .sum()
    }

    /// `(1/γ²) Σ_d p_d (1 − p_d)(M_d − 1)`: the row sum of entry variances of
    /// the centred scaled adjacency, identical for every row.
    pub fn variance_sum(&self) -> f64 {
        let gamma = self.expected_degree();
        let s: f64 = self
            .dims
            .iter()
            .zip(&self.probs)
            .map(|(&m, &p)| p * (1.0 - p) * (m - 1) as f64)
            .sum();
        s / (gamma * gamma)
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = Vec::with_capacity(self.dims.len());
        let mut s = 1;
        for &m in &self.dims {
            strides.push(s);
            s *= m;
        }
        strides
    }

    fn check_node(&self, x: usize) -> Result<()> {
        if x == 0 || x > self.node_count {
            return Err(Error::IndexOutOfRange {
                index: x,
                node_count: self.node_count,
            });
        }
        Ok(())
    }

    /// Mixed-radix digits of the 1-based node `x`.
    pub fn decode_index(&self, x: usize) -> Result<MixedRadixIndex> {
        self.check_node(x)?;
        let mut rest = x - 1;
        let digits = self
            .dims
            .iter()
            .map(|&m| {
                let digit = rest % m;
                rest /= m;
                digit
            })
            .collect();
        Ok(MixedRadixIndex { digits })
    }

    /// 1-based node number of a digit vector; inverse of [`Self::decode_index`].
    pub fn encode_index(&self, index: &MixedRadixIndex) -> Result<usize> {
        if index.digits.len() != self.dims.len() {
            return Err(Error::DigitLength {
                got: index.digits.len(),
                expected: self.dims.len(),
            });
        }
        let mut x = 0usize;
        for (d, (&digit, &m)) in index.digits.iter().zip(&self.dims).enumerate().rev() {
            if digit >= m {
                return Err(Error::DigitOutOfRange {
                    dim: d + 1,
                    digit,
                    size: m,
                });
            }
            x = x * m + digit;
        }
        Ok(x + 1)
    }

    /// Whether 1-based nodes `i` and `j` differ in exactly one digit.
    pub fn are_adjacent(&self, i: usize, j: usize) -> Result<bool> {
        self.check_node(i)?;
        self.check_node(j)?;
        Ok(self.link_dimension(i - 1, j - 1).is_some())
    }

    /// Dimension (0-based) along which 0-based nodes `a` and `b` are linked.
    pub(crate) fn link_dimension(&self, a: usize, b: usize) -> Option<usize> {
        let (mut a, mut b) = (a, b);
        let mut differing = None;
        for (d, &m) in self.dims.iter().enumerate() {
            if a % m != b % m {
                if differing.is_some() {
                    return None;
                }
                differing = Some(d);
            }
            a /= m;
            b /= m;
        }
        differing
    }

    /// Every supergraph link once, in lattice order: ascending by lower node,
    /// then by upper node. Nodes are 0-based.
    pub fn links(&self) -> impl Iterator<Item = Link> + '_ {
        (0..self.node_count).flat_map(move |node| self.links_from(node))
    }

    /// Links `(node, other)` with `other > node`, ascending in `other`.
    pub(crate) fn links_from(&self, node: usize) -> Vec<Link> {
        let strides = self.strides();
        let mut out = Vec::new();
        for (d, (&m, &stride)) in self.dims.iter().zip(&strides).enumerate() {
            let digit = (node / stride) % m;
            for k in digit + 1..m {
                out.push(Link {
                    lo: node,
                    hi: node + (k - digit) * stride,
                    dim: d,
                });
            }
        }
        out.sort_unstable_by_key(|l| l.hi);
        out
    }

    /// Number of supergraph links, `N · Σ_d (M_d − 1) / 2`.
    pub fn link_count(&self) -> usize {
        let per_node: usize = self.dims.iter().map(|&m| m - 1).sum();
        self.node_count * per_node / 2
    }

    fn check_dense(&self) -> Result<()> {
        if self.node_count > DENSE_LIMIT {
            return Err(Error::SizeLimit {
                what: "dense lattice matrices",
                order: self.node_count,
                limit: DENSE_LIMIT,
            });
        }
        Ok(())
    }

    /// Dense 0/1 adjacency of the full lattice.
    pub fn lattice_adjacency(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        let n = self.node_count;
        let mut a = DMatrix::zeros(n, n);
        for link in self.links() {
            a[(link.lo, link.hi)] = 1.0;
            a[(link.hi, link.lo)] = 1.0;
        }
        Ok(a)
    }

    /// Kronecker term of dimension `d`: `K_{M_d}` in position `d` and
    /// identities elsewhere. Factors are ordered so that dimension 1 is the
    /// fastest-varying index, matching the node numbering.
    pub fn kronecker_term(&self, d: usize) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        let mut acc = DMatrix::from_element(1, 1, 1.0);
        for (k, &m) in self.dims.iter().enumerate().rev() {
            let factor = if k == d {
                complete_graph(m)
            } else {
                DMatrix::identity(m, m)
            };
            acc = acc.kronecker(&factor);
        }
        Ok(acc)
    }

    /// Expected scaled adjacency `B = (1/γ) Σ_d p_d · (Kronecker term d)`.
    pub fn expected_matrix(&self) -> Result<DMatrix<f64>> {
        self.check_dense()?;
        let gamma = self.expected_degree();
        let n = self.node_count;
        let mut b = DMatrix::zeros(n, n);
        for (d, &p) in self.probs.iter().enumerate() {
            b += self.kronecker_term(d)? * (p / gamma);
        }
        Ok(b)
    }

    /// One entry per `j ∈ {0,1}^D`, unmerged, in bitmask order (bit `d` set
    /// means `j_d = 1`).
    pub fn branches(&self) -> Vec<Branch> {
        let rank = self.rank();
        let gamma = self.expected_degree();
        (0..1u64 << rank)
            .map(|mask| {
                let mut value = 0.0;
                let mut multiplicity = 1usize;
                for (d, (&m, &p)) in self.dims.iter().zip(&self.probs).enumerate() {
                    if mask >> d & 1 == 0 {
                        value += p * (m - 1) as f64;
                    } else {
                        value -= p;
                        multiplicity *= m - 1;
                    }
                }
                Branch {
                    mask,
                    value: value / gamma,
                    multiplicity,
                }
            })
            .collect()
    }

    /// Eigenvalues of `B` with multiplicities, exact duplicates merged.
    pub fn expected_spectrum(&self) -> ExpectedSpectrum {
        let mut entries: Vec<SpectralAtom> = Vec::new();
        for b in self.branches() {
            match entries.iter_mut().find(|e| e.value == b.value) {
                Some(e) => e.multiplicity += b.multiplicity,
                None => entries.push(SpectralAtom {
                    value: b.value,
                    multiplicity: b.multiplicity,
                }),
            }
        }
        ExpectedSpectrum { entries }
    }
}

/// Adjacency of the complete graph `K_m`.
pub fn complete_graph(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { 1.0 })
}

/// Mixed-radix digits `β(x, d)` of a node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MixedRadixIndex {
    pub digits: Vec<usize>,
}

impl From<Vec<usize>> for MixedRadixIndex {
    fn from(digits: Vec<usize>) -> Self {
        Self { digits }
    }
}

/// Supergraph link between 0-based nodes `lo < hi` along dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Link {
    pub lo: usize,
    pub hi: usize,
    pub dim: usize,
}

/// Eigenvalue `b_j` of the expected scaled adjacency for index `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub mask: u64,
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAtom {
    pub value: f64,
    pub multiplicity: usize,
}

/// Spectrum of `B` as a multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedSpectrum {
    pub entries: Vec<SpectralAtom>,
}

impl ExpectedSpectrum {
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Exact step CDF of the atomic measure `(1/N) Σ m_j δ_{b_j}`.
    pub fn cdf(&self, x: f64) -> f64 {
        let n = self.total_multiplicity() as f64;
        self.entries
            .iter()
            .filter(|e| e.value <= x)
            .map(|e| e.multiplicity as f64)
            .sum::<f64>()
            / n
    }

    /// Eigenvalue list with multiplicities expanded, ascending.
    pub fn expanded(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.value, e.multiplicity))
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}
