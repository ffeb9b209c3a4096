//! Counting fixed words and computing the critical values `c_g`.
//!
//! For an element `g` with finite restriction closure `R(g)`, the transfer
//! matrix `A[h][h'] = #{x : h·x = x, h|_x = h'}` counts stationary edges of
//! the Moore diagram. Then `|G_g^k| = Σ_h (A^k)[g][h]` counts words of length
//! `k` fixed by `g`, and `|F_g^k| = (A^k)[g][e]` those with trivial
//! restriction as well.

use std::collections::HashMap;

use num::{BigInt, BigRational, BigUint, One, Zero};
use rayon::prelude::*;

use crate::action::{act_and_restrict, SelfSimilarAction};
use crate::closure::{exact_equal, Caps, ClosureMachine, EqualityOptions};
use crate::error::{Error, Result};
use crate::linalg;

/// Stationary-edge counts on the restriction closure of an element.
#[derive(Clone, Debug)]
pub struct TransferMatrix<E> {
    index: Vec<E>,
    entries: Vec<Vec<u32>>,
    identity: Option<usize>,
    start: usize,
    alphabet_size: usize,
}

type BigMatrix = Vec<Vec<BigUint>>;

fn mat_mul(a: &BigMatrix, b: &BigMatrix) -> BigMatrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = BigUint::zero();
                    for k in 0..n {
                        if !a[i][k].is_zero() && !b[k][j].is_zero() {
                            s += &a[i][k] * &b[k][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

impl<E: Clone + Eq + std::hash::Hash> TransferMatrix<E> {
    pub fn build<A>(action: &A, g: &E, caps: &Caps) -> Result<Self>
    where
        A: SelfSimilarAction<Element = E>,
    {
        let machine = ClosureMachine::build(action, std::slice::from_ref(g), caps)?;
        Ok(TransferMatrix::from_closure(
            &machine,
            machine.seed_class(0),
        ))
    }

    pub fn from_closure(machine: &ClosureMachine<E>, start: usize) -> Self {
        let n = machine.len();
        let size = machine.alphabet_size();
        let mut entries = vec![vec![0u32; n]; n];
        for (c, row) in entries.iter_mut().enumerate() {
            for x in 0..size {
                if machine.output(c, x) == x {
                    row[machine.target(c, x)] += 1;
                }
            }
        }
        TransferMatrix {
            index: machine.reps().to_vec(),
            entries,
            identity: machine.identity(),
            start,
            alphabet_size: size,
        }
    }
}

impl<E> TransferMatrix<E> {
    /// The closure elements indexing rows and columns.
    pub fn index(&self) -> &[E] {
        &self.index
    }

    pub fn entry(&self, h: usize, h2: usize) -> u32 {
        self.entries[h][h2]
    }

    pub fn entries(&self) -> &[Vec<u32>] {
        &self.entries
    }

    pub fn identity(&self) -> Option<usize> {
        self.identity
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `A^k` by repeated squaring.
    pub fn power(&self, k: u64) -> Vec<Vec<BigUint>> {
        let n = self.len();
        let mut result: BigMatrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            BigUint::one()
                        } else {
                            BigUint::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut base: BigMatrix = self
            .entries
            .iter()
            .map(|r| r.iter().map(|&v| BigUint::from(v)).collect())
            .collect();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = mat_mul(&result, &base);
            }
            k >>= 1;
            if k > 0 {
                base = mat_mul(&base, &base);
            }
        }
        result
    }

    /// `(|G^k|, |F^k|)` for the start element.
    pub fn counts(&self, k: u64) -> (BigUint, BigUint) {
        let p = self.power(k);
        let row = &p[self.start];
        let g = row.iter().sum();
        let f = self.identity.map_or_else(BigUint::zero, |e| row[e].clone());
        (g, f)
    }
}

/// `|G_g^k| = #{v ∈ X^k : g·v = v}`.
pub fn count_g<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    k: u64,
    caps: &Caps,
) -> Result<BigUint> {
    Ok(TransferMatrix::build(action, g, caps)?.counts(k).0)
}

/// `|F_g^k| = #{v ∈ X^k : g·v = v, g|_v = e}`.
pub fn count_f<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    k: u64,
    caps: &Caps,
) -> Result<BigUint> {
    Ok(TransferMatrix::build(action, g, caps)?.counts(k).1)
}

/// Default enumeration budget for [`brute_force_counts`].
pub const DEFAULT_BUDGET: u128 = 1_000_000;

/// `(|G_g^k|, |F_g^k|)` by enumerating `X^k` directly, deciding `g|_v = e`
/// with the exact word problem.
pub fn brute_force_counts<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    k: u32,
    budget: u128,
    opts: &EqualityOptions,
) -> Result<(BigUint, BigUint)> {
    let size = action.alphabet().size() as u128;
    let needed = size.checked_pow(k).unwrap_or(u128::MAX);
    if needed > budget {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let mut fixed: u64 = 0;
    let mut restrictions: HashMap<A::Element, u64> = HashMap::new();
    for v in action.alphabet().words(k as usize) {
        let (image, r) = act_and_restrict(action, g, &v);
        if image == v {
            fixed += 1;
            *restrictions.entry(r).or_insert(0) += 1;
        }
    }
    let e = action.identity();
    let distinct: Vec<(A::Element, u64)> = restrictions.into_iter().collect();
    let trivial = distinct
        .par_iter()
        .map(|(r, m)| {
            Ok(if exact_equal(action, r, &e, opts)? {
                *m
            } else {
                0
            })
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok((
        BigUint::from(fixed),
        BigUint::from(trivial.iter().sum::<u64>()),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalMethod {
    /// Exact absorption probability from a linear solve.
    LinearSolve,
    /// Only the bracketing bounds at a finite depth.
    LimitBound,
}

/// Critical values of every element of a restriction closure.
#[derive(Clone, Debug)]
pub struct CriticalValues<E> {
    pub elements: Vec<E>,
    pub values: Vec<BigRational>,
    pub method: CriticalMethod,
}

impl<E: Eq> CriticalValues<E> {
    pub fn get(&self, g: &E) -> Option<&BigRational> {
        self.elements
            .iter()
            .position(|h| h == g)
            .map(|i| &self.values[i])
    }
}

/// Solves for `c_h` on all of `R(g)` at once. The value at index
/// `matrix.start()` is `c_g`.
pub fn critical_values_of<E: Clone>(matrix: &TransferMatrix<E>) -> CriticalValues<E> {
    let n = matrix.len();
    let zero = BigRational::zero();
    let mut values = vec![zero; n];
    if let Some(e) = matrix.identity {
        // states with a stationary path to e
        let mut reaches = vec![false; n];
        reaches[e] = true;
        let mut changed = true;
        while changed {
            changed = false;
            for h in 0..n {
                if !reaches[h] && (0..n).any(|t| matrix.entries[h][t] > 0 && reaches[t]) {
                    reaches[h] = true;
                    changed = true;
                }
            }
        }
        let live: Vec<usize> = (0..n).filter(|&h| reaches[h] && h != e).collect();
        let pos: HashMap<usize, usize> = live.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let size = BigRational::from_integer(BigInt::from(matrix.alphabet_size));
        let system: Vec<Vec<BigRational>> = live
            .iter()
            .map(|&h| {
                let mut row = vec![BigRational::zero(); live.len()];
                row[pos[&h]] = BigRational::one();
                for (&t, &j) in &pos {
                    let a = matrix.entries[h][t];
                    if a > 0 {
                        row[j] -= BigRational::from_integer(BigInt::from(a)) / &size;
                    }
                }
                row
            })
            .collect();
        let rhs: Vec<BigRational> = live
            .iter()
            .map(|&h| BigRational::from_integer(BigInt::from(matrix.entries[h][e])) / &size)
            .collect();
        let solution =
            linalg::solve(&system, &rhs).expect("leaking sub-stochastic system is non-singular");
        for (&h, v) in live.iter().zip(solution) {
            values[h] = v;
        }
        values[e] = BigRational::one();
    }
    CriticalValues {
        elements: matrix.index.clone(),
        values,
        method: CriticalMethod::LinearSolve,
    }
}

/// `c_g = lim_k |X|^{−k} |F_g^k|`, computed exactly.
pub fn critical_value<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    caps: &Caps,
) -> Result<BigRational> {
    let matrix = TransferMatrix::build(action, g, caps)?;
    let values = critical_values_of(&matrix);
    Ok(values.values[matrix.start()].clone())
}

/// Critical values of every element in the restriction closure of `g`.
pub fn critical_values<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    caps: &Caps,
) -> Result<CriticalValues<A::Element>> {
    Ok(critical_values_of(&TransferMatrix::build(action, g, caps)?))
}

/// `(|X|^{−k}|F_g^k|, |X|^{−k}|G_g^k|)`, which bracket `c_g`.
pub fn critical_limit_bounds<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    k: u64,
    caps: &Caps,
) -> Result<(BigRational, BigRational)> {
    let matrix = TransferMatrix::build(action, g, caps)?;
    let (gk, fk) = matrix.counts(k);
    let scale = num::pow(BigInt::from(matrix.alphabet_size), k as usize);
    Ok((
        BigRational::new(BigInt::from(fk), scale.clone()),
        BigRational::new(BigInt::from(gk), scale),
    ))
}
