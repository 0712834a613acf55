//! Local machinery at odd primes: Jordan decompositions over `Z_p`, the
//! "splits off r hyperbolic planes" test, an explicit local representation of a
//! target Gram matrix, and a brute-force global representation oracle.

use nalgebra::DMatrix;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactalg::{bilinear, Int, IntMatrix, Rat, RatMatrix};
use crate::lattice::EvenLattice;

/// Default p-adic working precision `k` (entries are handled mod `p^k`).
pub const DEFAULT_PRECISION: u32 = 12;

/// One Jordan constituent `p^valuation · gram` with `gram` unimodular over `Z_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JordanBlock {
    pub valuation: u32,
    #[serde(serialize_with = "serialize_int_matrix")]
    pub gram: IntMatrix,
}

/// A Jordan decomposition of `L ⊗ Z_p` for odd `p`, together with a witness `U`
/// satisfying `Uᵗ·S·U ≡ ⊕ p^v·block (mod p^k)`.
#[derive(Clone, Debug, Serialize)]
pub struct JordanDecomposition {
    pub p: u64,
    pub precision: u32,
    pub blocks: Vec<JordanBlock>,
    #[serde(serialize_with = "serialize_int_matrix")]
    pub witness: IntMatrix,
}

fn serialize_int_matrix<S: serde::Serializer>(m: &IntMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.rows()))?;
    for row in m.to_rows() {
        seq.serialize_element(&row.iter().map(|x| x.to_string()).collect::<Vec<_>>())?;
    }
    seq.end()
}

impl JordanDecomposition {
    /// Rank of the valuation-0 (unimodular) constituent.
    pub fn unimodular_rank(&self) -> usize {
        self.blocks.iter().filter(|b| b.valuation == 0).map(|b| b.gram.rows()).sum()
    }

    /// The unimodular constituent (empty matrix if absent).
    pub fn unimodular_block(&self) -> IntMatrix {
        self.blocks.iter().find(|b| b.valuation == 0).map(|b| b.gram.clone()).unwrap_or_else(|| IntMatrix::zeros(0, 0))
    }

    /// `⊕ p^v·block` as one block-diagonal integer matrix.
    pub fn block_diagonal(&self) -> IntMatrix {
        let n: usize = self.blocks.iter().map(|b| b.gram.rows()).sum();
        let mut out = IntMatrix::zeros(n, n);
        let mut off = 0;
        for b in &self.blocks {
            let scale = Int::from(self.p).pow(b.valuation);
            for i in 0..b.gram.rows() {
                for j in 0..b.gram.rows() {
                    out[(off + i, off + j)] = &b.gram[(i, j)] * &scale;
                }
            }
            off += b.gram.rows();
        }
        out
    }

    /// Whether `Uᵗ·S·U ≡ ⊕ p^v·block (mod p^k)` and `det U` is a `p`-unit.
    pub fn witness_holds(&self, gram: &IntMatrix) -> bool {
        let modulus = Int::from(self.p).pow(self.precision);
        let lhs = match self.witness.transpose().mul(gram).and_then(|m| m.mul(&self.witness)) {
            Ok(m) => m,
            Err(_) => return false,
        };
        let rhs = self.block_diagonal();
        if lhs.rows() != rhs.rows() {
            return false;
        }
        let congruent =
            (0..lhs.rows()).all(|i| (0..lhs.cols()).all(|j| (&lhs[(i, j)] - &rhs[(i, j)]).mod_floor(&modulus).is_zero()));
        let det = self.witness.det().unwrap_or_else(|_| Int::zero());
        congruent && !det.mod_floor(&Int::from(self.p)).is_zero()
    }
}

/// Check that `p` is an odd prime; `p = 2` is reported as unsupported.
pub fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::UnsupportedPrime(2));
    }
    if p < 2 || (2..).take_while(|d| d * d <= p).any(|d| p % d == 0) {
        return Err(Error::InvalidInput(format!("{p} is not a prime")));
    }
    Ok(())
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(x: &Int, p: u64) -> u32 {
    let p = Int::from(p);
    let mut x = x.abs();
    let mut v = 0;
    while !x.is_zero() && x.is_multiple_of(&p) {
        x /= &p;
        v += 1;
    }
    v
}

/// Valuation of a rational; `None` for zero.
fn rat_valuation(x: &Rat, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    Some(valuation(x.numer(), p) as i64 - valuation(x.denom(), p) as i64)
}

/// Image of a `p`-integral rational in `Z/p^k`, as a representative in `[0, p^k)`.
fn reduce_mod(x: &Rat, modulus: &Int) -> Result<Int> {
    let inv = mod_inverse(&x.denom().mod_floor(modulus), modulus)
        .ok_or_else(|| Error::Precondition("denominator is not a p-unit".into()))?;
    Ok((x.numer() * inv).mod_floor(modulus))
}

fn mod_inverse(a: &Int, m: &Int) -> Option<Int> {
    let g = a.extended_gcd(m);
    g.gcd.is_one().then(|| g.x.mod_floor(m))
}

/// Jordan decomposition of `L ⊗ Z_p` for an odd prime `p`, to precision `p^k`.
///
/// The Gram matrix is diagonalised by exact rational congruences that only
/// divide by `p`-units; the diagonal entries are grouped by valuation.
pub fn jordan_decompose_odd(lattice: &EvenLattice, p: u64, k: u32) -> Result<JordanDecomposition> {
    check_odd_prime(p)?;
    let det = lattice.det();
    let vdet = valuation(&det, p);
    if k < vdet + 2 {
        return Err(Error::Precondition(format!("precision {k} below v_p(det) + 2 = {}", vdet + 2)));
    }
    let n = lattice.rank();
    let mut g = lattice.gram_rat();
    let mut u = RatMatrix::identity(n);

    for start in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in start..n {
            for j in i..n {
                if let Some(v) = rat_valuation(&g[(i, j)], p) {
                    // Prefer diagonal pivots at equal valuation.
                    let better = match best {
                        None => true,
                        Some((bv, bi, bj)) => v < bv || (v == bv && i == j && bi != bj),
                    };
                    if better {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let (_, i, j) = best.ok_or(Error::Singular)?;
        let pivot = if i == j {
            i
        } else {
            // Only an off-diagonal entry attains the minimum: e_i ← e_i + e_j makes
            // the diagonal entry g_ii + 2g_ij + g_jj of that valuation (p odd).
            add_basis_vector(&mut g, &mut u, i, j);
            i
        };
        swap_basis(&mut g, &mut u, start, pivot);
        let d = g[(start, start)].clone();
        for t in start + 1..n {
            if g[(start, t)].is_zero() {
                continue;
            }
            let c = &g[(start, t)] / &d;
            // e_t ← e_t − c·e_start
            for r in 0..n {
                let delta = &u[(r, start)] * &c;
                u[(r, t)] -= delta;
            }
            for r in 0..n {
                let delta = &g[(r, start)] * &c;
                g[(r, t)] -= delta;
            }
            for r in 0..n {
                let delta = &g[(start, r)] * &c;
                g[(t, r)] -= delta;
            }
        }
    }

    let modulus = Int::from(p).pow(k);
    let mut order: Vec<(u32, usize)> = (0..n)
        .map(|i| {
            let v = rat_valuation(&g[(i, i)], p).expect("nondegenerate diagonal") as u32;
            (v, i)
        })
        .collect();
    order.sort();
    let mut witness = IntMatrix::zeros(n, n);
    for (col, &(_, i)) in order.iter().enumerate() {
        for r in 0..n {
            witness[(r, col)] = reduce_mod(&u[(r, i)], &modulus)?;
        }
    }
    let mut blocks: Vec<JordanBlock> = Vec::new();
    let mut idx = 0;
    while idx < order.len() {
        let v = order[idx].0;
        let members: Vec<usize> = order[idx..].iter().take_while(|(w, _)| *w == v).map(|&(_, i)| i).collect();
        let scale = Rat::from_integer(Int::from(p).pow(v));
        let mut block = IntMatrix::zeros(members.len(), members.len());
        for (a, &i) in members.iter().enumerate() {
            block[(a, a)] = reduce_mod(&(&g[(i, i)] / &scale), &modulus)?;
        }
        idx += members.len();
        blocks.push(JordanBlock { valuation: v, gram: block });
    }
    Ok(JordanDecomposition { p, precision: k, blocks, witness })
}

fn add_basis_vector(g: &mut RatMatrix, u: &mut RatMatrix, i: usize, j: usize) {
    let n = g.rows();
    for r in 0..n {
        let x = u[(r, j)].clone();
        u[(r, i)] += x;
        let y = g[(r, j)].clone();
        g[(r, i)] += y;
    }
    for r in 0..n {
        let y = g[(j, r)].clone();
        g[(i, r)] += y;
    }
}

fn swap_basis(g: &mut RatMatrix, u: &mut RatMatrix, a: usize, b: usize) {
    if a != b {
        g.swap_rows(a, b);
        g.swap_cols(a, b);
        u.swap_cols(a, b);
    }
}

/// Legendre symbol `(a/p)` for an odd prime `p`.
pub fn legendre(a: &Int, p: u64) -> i32 {
    let pp = Int::from(p);
    let a = a.mod_floor(&pp);
    if a.is_zero() {
        return 0;
    }
    if a.modpow(&((&pp - 1u32) / 2u32), &pp).is_one() {
        1
    } else {
        -1
    }
}

/// Whether `L ⊗ Z_p` splits off `r` hyperbolic planes (odd `p`).
///
/// The unimodular constituent of rank `n` contains `H^r` iff `n > 2r`, or
/// `n = 2r` and `(−1)^r·det` is a square unit.
pub fn splits_hyperbolic_planes_local(lattice: &EvenLattice, p: u64, r: usize) -> Result<bool> {
    check_odd_prime(p)?;
    let k = DEFAULT_PRECISION.max(valuation(&lattice.det(), p) + 2);
    let jordan = jordan_decompose_odd(lattice, p, k)?;
    let n = jordan.unimodular_rank();
    Ok(match n.cmp(&(2 * r)) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            let block = jordan.unimodular_block();
            let det = if n == 0 { Int::one() } else { block.det()? };
            let sign = if r % 2 == 0 { Int::one() } else { -Int::one() };
            legendre(&(sign * det), p) == 1
        }
    })
}

/// Number of orthogonal summands `U` visible on the diagonal of the Gram matrix:
/// disjoint index pairs `(i, i+1)` spanning `[[0,1],[1,0]]` and orthogonal to all
/// other basis vectors.  At `p = 2` this is the only splitting evidence used.
pub fn visible_hyperbolic_planes(lattice: &EvenLattice) -> usize {
    let g = lattice.gram_i64();
    let n = g.len();
    let mut count = 0;
    let mut i = 0;
    while i + 1 < n {
        let is_u = g[i][i] == 0 && g[i + 1][i + 1] == 0 && g[i][i + 1] == 1;
        let isolated = (0..n).filter(|&t| t != i && t != i + 1).all(|t| g[i][t] == 0 && g[i + 1][t] == 0);
        if is_u && isolated {
            count += 1;
            i += 2;
        } else {
            i += 1;
        }
    }
    count
}

/// Answer of a split check at one prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitStatus {
    /// Decided by the odd-`p` Jordan criterion.
    Verified(bool),
    /// `p = 2` with enough integral `U` summands visible: true structurally.
    Structural,
    /// `p = 2` without a visible integral `U^r`: not decided.
    Unverified,
}

/// Split check at any prime, applying the `p = 2` policy instead of failing.
pub fn split_status(lattice: &EvenLattice, p: u64, r: usize) -> Result<SplitStatus> {
    if p == 2 {
        return Ok(if visible_hyperbolic_planes(lattice) >= r { SplitStatus::Structural } else { SplitStatus::Unverified });
    }
    splits_hyperbolic_planes_local(lattice, p, r).map(SplitStatus::Verified)
}

/// Result of [`construct_local_representation`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalRepresentation {
    /// `γ̃_i` in coordinates of `U^r ⊕ L̃` (order `f₁, f′₁, …, f_r, f′_r`, then `L̃`).
    pub vectors: Vec<Vec<Rat>>,
    /// Gram matrix `((γ̃_i, γ̃_j))`, equal to the target.
    pub gram: RatMatrix,
    /// The coefficients `½((e_i,e_j) − (γ_i,γ_j))` of `f′_j` in `γ̃_i`.
    pub corrections: Vec<Vec<Rat>>,
    /// Whether `γ̃ ≡ γ` modulo `L^r` over `Z` (always true over `Z_p`, `p` odd).
    pub integral_coset: bool,
}

/// Realise the Gram matrix `T = ((e_i, e_j))` inside `γ + (U^r ⊕ L̃)^r` by
/// `γ̃_i = γ_i + f_i + ½ Σ_j ((e_i,e_j) − (γ_i,γ_j)) f′_j`.
///
/// `gammas` are `r` vectors of `L̃′` in `L̃` coordinates.  The congruence
/// precondition is `T_ij ≡ (γ_i, γ_j) mod Z` off the diagonal and
/// `T_ii/2 ≡ q(γ_i) mod Z` on it.
pub fn construct_local_representation(
    l_tilde: &EvenLattice,
    gammas: &[Vec<Rat>],
    target: &RatMatrix,
) -> Result<LocalRepresentation> {
    let r = gammas.len();
    if target.rows() != r || target.cols() != r {
        return Err(Error::DimensionMismatch(format!("target must be {r}×{r}")));
    }
    let m = l_tilde.rank();
    let s = l_tilde.gram_rat();
    if gammas.iter().any(|g| g.len() != m) {
        return Err(Error::DimensionMismatch("γ has wrong length".into()));
    }
    for g in gammas {
        if s.mul_vec(g)?.iter().any(|x| !x.is_integer()) {
            return Err(Error::Precondition("γ_i is not in the dual lattice".into()));
        }
    }
    let two = Rat::from_integer(Int::from(2));
    let mut corrections = vec![vec![Rat::zero(); r]; r];
    let mut integral = true;
    for i in 0..r {
        for j in 0..r {
            if target[(i, j)] != target[(j, i)] {
                return Err(Error::InvalidInput("target Gram matrix is not symmetric".into()));
            }
            let diff = &target[(i, j)] - bilinear(&s, &gammas[i], &gammas[j]);
            let ok = if i == j { (&diff / &two).is_integer() } else { diff.is_integer() };
            if !ok {
                return Err(Error::Precondition(format!("target entry ({i},{j}) is not congruent to the Gram of γ")));
            }
            let c = diff / &two;
            integral &= c.is_integer();
            corrections[i][j] = c;
        }
    }
    let vectors: Vec<Vec<Rat>> = (0..r)
        .map(|i| {
            let mut v = vec![Rat::zero(); 2 * r + m];
            v[2 * i] = Rat::one();
            for j in 0..r {
                v[2 * j + 1] = corrections[i][j].clone();
            }
            v[2 * r..].clone_from_slice(&gammas[i]);
            v
        })
        .collect();
    let full = u_power(r).map(|u| u.direct_sum(l_tilde)).unwrap_or_else(|| l_tilde.clone());
    let fs = full.gram_rat();
    let gram = RatMatrix::from_fn(r, r, |i, j| bilinear(&fs, &vectors[i], &vectors[j]));
    Ok(LocalRepresentation { vectors, gram, corrections, integral_coset: integral })
}

/// `U^r` as an even lattice (`None` for `r = 0`).
pub fn u_power(r: usize) -> Option<EvenLattice> {
    (r > 0).then(|| EvenLattice::from_name(&vec!["U"; r].join("+")).expect("U^r is a valid lattice"))
}

/// Exact rational lower bound for the smallest eigenvalue of a positive definite
/// Gram matrix: the Gershgorin bound when positive, otherwise a shrunken
/// floating-point eigenvalue converted to a rational.
pub fn min_eigenvalue_lower_bound(gram: &IntMatrix) -> Result<Rat> {
    let n = gram.rows();
    let gersh = (0..n)
        .map(|i| {
            let off: Int = (0..n).filter(|&j| j != i).map(|j| gram[(i, j)].abs()).sum();
            &gram[(i, i)] - off
        })
        .min()
        .unwrap_or_else(Int::zero);
    if gersh.is_positive() {
        return Ok(Rat::from_integer(gersh));
    }
    let rows = gram.to_f64();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lmin = m.symmetric_eigen().eigenvalues.min();
    if lmin <= 1e-9 {
        return Err(Error::Precondition("lattice is not positive definite".into()));
    }
    // Floating error on small integer matrices is far below 1e-6 relative.
    let safe = lmin * (1.0 - 1e-6);
    Rat::from_float(safe).ok_or_else(|| Error::NonConvergent("eigenvalue bound".into()))
}

/// Per-coordinate box bound `⌈√(2·max T_ii / λ_min)⌉` for the search.
pub fn search_bound(gram: &IntMatrix, target: &RatMatrix) -> Result<i64> {
    let lmin = min_eigenvalue_lower_bound(gram)?;
    let max_diag = (0..target.rows()).map(|i| target[(i, i)].clone()).max().unwrap_or_else(Rat::zero);
    let ratio = Rat::from_integer(Int::from(2)) * max_diag / lmin;
    // Integer ceiling of the square root of a nonnegative rational.
    let c = ratio.ceil().to_integer();
    let mut b = c.sqrt();
    while Rat::from_integer(&b * &b) < ratio {
        b += 1;
    }
    b.to_i64().ok_or_else(|| Error::NonConvergent("search bound too large".into()))
}

/// All `λ ∈ (L′)^r` with `λ_i ≡ γ_i (mod L)` and `q(λ) = T`, where `q(λ)_{ij} =
/// (λ_i, λ_j)/2` (so `T_ii = q(λ_i)`).  `bound` overrides the automatic
/// per-coordinate box bound when larger.  Output is sorted.
pub fn brute_force_representation_search(
    lpos: &EvenLattice,
    gammas: &[Vec<Rat>],
    target: &RatMatrix,
    bound: Option<i64>,
) -> Result<Vec<Vec<Vec<Rat>>>> {
    if lpos.bminus() > 0 {
        return Err(Error::Precondition("lattice must be positive definite".into()));
    }
    let r = gammas.len();
    if target.rows() != r || target.cols() != r {
        return Err(Error::DimensionMismatch(format!("target must be {r}×{r}")));
    }
    let n = lpos.rank();
    let s = lpos.gram_rat();
    let b = search_bound(lpos.gram(), target)?.max(bound.unwrap_or(0));
    let two = Rat::from_integer(Int::from(2));

    // Candidates for each λ_i separately, with exact norm check.
    let mut per_slot: Vec<Vec<Vec<Rat>>> = Vec::with_capacity(r);
    for (i, g) in gammas.iter().enumerate() {
        if g.len() != n {
            return Err(Error::DimensionMismatch("γ has wrong length".into()));
        }
        let t = target[(i, i)].clone();
        // Coordinates range over γ + Z within [−b, b].
        let ranges: Vec<Vec<Rat>> = g
            .iter()
            .map(|gc| {
                let lo = (Rat::from_integer(Int::from(-b)) - gc).ceil().to_integer();
                let hi = (Rat::from_integer(Int::from(b)) - gc).floor().to_integer();
                let lo = lo.to_i64().unwrap_or(0);
                let hi = hi.to_i64().unwrap_or(-1);
                (lo..=hi).map(|x| gc + Rat::from_integer(Int::from(x))).collect()
            })
            .collect();
        let first = ranges.first().cloned().unwrap_or_default();
        let mut found: Vec<Vec<Rat>> = first
            .par_iter()
            .flat_map_iter(|x0| {
                let mut out = Vec::new();
                let mut idx = vec![0usize; n.saturating_sub(1)];
                loop {
                    let mut v = Vec::with_capacity(n);
                    v.push(x0.clone());
                    for (a, &ix) in idx.iter().enumerate() {
                        v.push(ranges[a + 1][ix].clone());
                    }
                    if bilinear(&s, &v, &v) / &two == t {
                        out.push(v);
                    }
                    if !advance(&mut idx, &ranges[1..]) {
                        break;
                    }
                }
                out
            })
            .collect();
        found.sort();
        per_slot.push(found);
    }

    let mut solutions: Vec<Vec<Vec<Rat>>> = vec![Vec::new()];
    for i in 0..r {
        let mut next = Vec::new();
        for partial in &solutions {
            for cand in &per_slot[i] {
                let ok = (0..i).all(|j| bilinear(&s, &partial[j], cand) == &target[(i, j)] * &two);
                if ok {
                    let mut p = partial.clone();
                    p.push(cand.clone());
                    next.push(p);
                }
            }
        }
        solutions = next;
    }
    solutions.sort();
    Ok(solutions)
}

/// Odometer increment over mixed radices; false when wrapped around.
fn advance(idx: &mut [usize], ranges: &[Vec<Rat>]) -> bool {
    if ranges.iter().any(|r| r.is_empty()) {
        return false;
    }
    for (a, slot) in idx.iter_mut().enumerate().rev() {
        *slot += 1;
        if *slot < ranges[a].len() {
            return true;
        }
        *slot = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;
    use proptest::prelude::*;

    fn lat(rows: &[Vec<i64>]) -> EvenLattice {
        EvenLattice::from_i64("test", rows).unwrap()
    }

    #[test]
    fn jordan_examples() {
        let j = jordan_decompose_odd(&lat(&[vec![2]]), 3, 12).unwrap();
        assert_eq!(j.blocks.len(), 1);
        assert_eq!(j.blocks[0].valuation, 0);

        let u = lat(&[vec![0, 1], vec![1, 0]]);
        let j = jordan_decompose_odd(&u, 5, 12).unwrap();
        assert_eq!(j.blocks.len(), 1);
        assert_eq!(j.unimodular_rank(), 2);
        assert!(j.witness_holds(u.gram()));

        let d = lat(&[vec![2, 0], vec![0, 6]]);
        let j = jordan_decompose_odd(&d, 3, 12).unwrap();
        let vals: Vec<u32> = j.blocks.iter().map(|b| b.valuation).collect();
        assert_eq!(vals, vec![0, 1]);
        assert!(j.witness_holds(d.gram()));
    }

    #[test]
    fn jordan_rejects_bad_primes_and_precision() {
        let a1 = EvenLattice::from_name("A1").unwrap();
        assert_eq!(jordan_decompose_odd(&a1, 2, 12).unwrap_err(), Error::UnsupportedPrime(2));
        assert!(matches!(jordan_decompose_odd(&a1, 9, 12), Err(Error::InvalidInput(_))));
        let d = lat(&[vec![18]]);
        assert!(matches!(jordan_decompose_odd(&d, 3, 3), Err(Error::Precondition(_))));
        assert!(jordan_decompose_odd(&d, 3, 4).is_ok());
    }

    #[test]
    fn jordan_of_e8_and_a2() {
        let e8 = EvenLattice::from_name("E8").unwrap();
        for p in [3, 5, 7] {
            let j = jordan_decompose_odd(&e8, p, 12).unwrap();
            assert_eq!(j.unimodular_rank(), 8);
            assert!(j.witness_holds(e8.gram()));
        }
        let a2 = EvenLattice::from_name("A2").unwrap();
        let j = jordan_decompose_odd(&a2, 3, 12).unwrap();
        let vals: Vec<u32> = j.blocks.iter().map(|b| b.valuation).collect();
        assert_eq!(vals, vec![0, 1]);
        assert!(j.witness_holds(a2.gram()));
    }

    #[test]
    fn split_examples() {
        let e8 = EvenLattice::from_name("E8").unwrap();
        assert!(splits_hyperbolic_planes_local(&e8, 3, 2).unwrap());
        assert!(!splits_hyperbolic_planes_local(&EvenLattice::from_name("A1").unwrap(), 3, 1).unwrap());
        assert!(splits_hyperbolic_planes_local(&lat(&[vec![2, 0], vec![0, -2]]), 3, 1).unwrap());
        // diag(2, 2) at p = 3: −4 ≡ 2 is a non-square mod 3.
        assert!(!splits_hyperbolic_planes_local(&lat(&[vec![2, 0], vec![0, 2]]), 3, 1).unwrap());
        // … but at p = 5, −4 ≡ 1 is a square.
        assert!(splits_hyperbolic_planes_local(&lat(&[vec![2, 0], vec![0, 2]]), 5, 1).unwrap());
    }

    #[test]
    fn p2_policy() {
        let uu = EvenLattice::from_name("U+U+A1").unwrap();
        assert_eq!(visible_hyperbolic_planes(&uu), 2);
        assert_eq!(split_status(&uu, 2, 2).unwrap(), SplitStatus::Structural);
        let e8 = EvenLattice::from_name("E8").unwrap();
        assert_eq!(split_status(&e8, 2, 2).unwrap(), SplitStatus::Unverified);
        assert_eq!(split_status(&e8, 3, 2).unwrap(), SplitStatus::Verified(true));
    }

    #[test]
    fn local_representation_examples() {
        let zero = EvenLattice::from_name("A1").unwrap();
        // L = U ⊕ A1 with γ = 0 in A1; T = [[2]] gives f + f′.
        let rep = construct_local_representation(&zero, &[vec![rat(0, 1)]], &RatMatrix::from_i64(&[vec![2]]).unwrap()).unwrap();
        assert_eq!(rep.vectors[0][..2], [rat(1, 1), rat(1, 1)]);
        assert_eq!(rep.gram, RatMatrix::from_i64(&[vec![2]]).unwrap());

        // U² ⊕ A1, T = 2I.
        let t = RatMatrix::from_i64(&[vec![2, 0], vec![0, 2]]).unwrap();
        let rep = construct_local_representation(&zero, &[vec![rat(0, 1)], vec![rat(0, 1)]], &t).unwrap();
        assert_eq!(rep.gram, t);
        assert_eq!(rep.vectors[0][..4], [rat(1, 1), rat(1, 1), rat(0, 1), rat(0, 1)]);
        assert!(rep.integral_coset);

        // T equal to the Gram of γ: no correction.
        let g = vec![rat(1, 2)];
        let rep = construct_local_representation(&zero, &[g], &RatMatrix::from_fn(1, 1, |_, _| rat(1, 2))).unwrap();
        assert!(rep.corrections[0][0].is_zero());

        // Violated congruence.
        assert!(matches!(
            construct_local_representation(&zero, &[vec![rat(1, 2)]], &RatMatrix::from_i64(&[vec![2]]).unwrap()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn brute_force_examples() {
        let a1 = EvenLattice::from_name("A1").unwrap();
        let sols = brute_force_representation_search(&a1, &[vec![rat(1, 2)]], &RatMatrix::from_fn(1, 1, |_, _| rat(1, 4)), None)
            .unwrap();
        assert_eq!(sols, vec![vec![vec![rat(-1, 2)]], vec![vec![rat(1, 2)]]]);
        let none =
            brute_force_representation_search(&a1, &[vec![rat(0, 1)]], &RatMatrix::from_i64(&[vec![3]]).unwrap(), None).unwrap();
        assert!(none.is_empty());
        let zero =
            brute_force_representation_search(&a1, &[vec![rat(0, 1)]], &RatMatrix::from_i64(&[vec![0]]).unwrap(), None).unwrap();
        assert_eq!(zero, vec![vec![vec![rat(0, 1)]]]);
    }

    #[test]
    fn brute_force_a2_roots() {
        let a2 = EvenLattice::from_name("A2").unwrap();
        let z = vec![rat(0, 1), rat(0, 1)];
        let roots = brute_force_representation_search(&a2, &[z], &RatMatrix::from_i64(&[vec![1]]).unwrap(), None).unwrap();
        assert_eq!(roots.len(), 6);
        // Nontrivial class of A2′/A2 has three minimal vectors of norm 1/3.
        let d = a2.discriminant_group();
        let g = (0..d.order()).find(|&a| !d.lift(a).iter().all(Zero::is_zero)).unwrap();
        let min =
            brute_force_representation_search(&a2, &[d.lift(g).to_vec()], &RatMatrix::from_fn(1, 1, |_, _| rat(1, 3)), None)
                .unwrap();
        assert_eq!(min.len(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn jordan_witness_congruence(
            p in prop::sample::select(vec![3u64, 5, 7, 11, 13]),
            a in -6i64..=6, b in -6i64..=6, c in -6i64..=6,
            x in -4i64..=4, y in -4i64..=4, z in -4i64..=4,
        ) {
            let rows = vec![vec![2 * a, x, y], vec![x, 2 * b, z], vec![y, z, 2 * c]];
            if let Ok(l) = EvenLattice::from_i64("random", &rows) {
                let k = DEFAULT_PRECISION.max(valuation(&l.det(), p) + 2);
                let j = jordan_decompose_odd(&l, p, k).unwrap();
                prop_assert!(j.witness_holds(l.gram()));
                prop_assert_eq!(j.blocks.iter().map(|b| b.gram.rows()).sum::<usize>(), 3);
            }
        }

        #[test]
        fn local_representation_is_exact(
            g in prop::collection::vec(-3i64..=3, 2),
            off in -5i64..=5, d0 in -3i64..=3, d1 in -3i64..=3,
        ) {
            // L̃ = A2; γ_i integral multiples of the discriminant generators.
            let a2 = EvenLattice::from_name("A2").unwrap();
            let disc = a2.discriminant_group();
            let gammas: Vec<Vec<Rat>> = g.iter().map(|&k| {
                let idx = disc.scale(k, 1 % disc.order());
                disc.lift(idx).to_vec()
            }).collect();
            let s = a2.gram_rat();
            let base = RatMatrix::from_fn(2, 2, |i, j| bilinear(&s, &gammas[i], &gammas[j]));
            let mut t = base.clone();
            t[(0, 0)] += Rat::from_integer(Int::from(2 * d0));
            t[(1, 1)] += Rat::from_integer(Int::from(2 * d1));
            t[(0, 1)] += Rat::from_integer(Int::from(off));
            t[(1, 0)] += Rat::from_integer(Int::from(off));
            let rep = construct_local_representation(&a2, &gammas, &t).unwrap();
            prop_assert_eq!(&rep.gram, &t);
            for (v, gm) in rep.vectors.iter().zip(&gammas) {
                prop_assert!(v[4..].iter().zip(gm).all(|(a, b)| a == b));
            }
        }
    }
}
