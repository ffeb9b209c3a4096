//! KMS states of the Toeplitz algebra for the gauge dynamics, evaluated
//! exactly at `r = e^{−β}`.
//!
//! For `0 < r < 1/|X|` and a normalised trace `τ` on the group, the state
//! `ψ_{r,τ}` vanishes on `s_v u_g s_w*` unless `v = w`, and then equals
//! `r^{|v|} ψ(u_g)` with
//!
//! `ψ(u_g) = (1 − |X|r) Σ_k r^k Σ_{y ∈ X^k, g·y = y} τ(g|_y)
//!         = (1 − |X|r) [(I − rA)⁻¹ t]_g`,
//!
//! where `A` is the transfer matrix of `g` and `t_h = τ(h)`. At `r = 1/|X|`
//! the only state is `s_v u_g s_v* ↦ |X|^{−|v|} c_g`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num::{BigInt, BigRational, One, Signed, Zero};
use rayon::prelude::*;

use crate::action::{act_and_restrict, SelfSimilarAction};
use crate::algebra::{rational_pow, Algebra, Combination, SpanningTerm};
use crate::alphabet::Word;
use crate::closure::{is_trivial, Caps};
use crate::counting::{critical_value, critical_values_of, TransferMatrix};
use crate::error::{Error, Result};
use crate::linalg;

pub type TraceFn<E> = Arc<dyn Fn(&E) -> BigRational + Send + Sync>;

/// A normalised trace on the group.
#[derive(Clone)]
pub enum Trace<E> {
    /// `τ_e(g) = 1` if `g = e`, else `0`.
    Dirac,
    /// `τ_1(g) = 1`.
    Trivial,
    /// `g ↦ c_g`.
    Critical,
    /// A rational-valued class function supplied by the caller.
    Custom { name: String, f: TraceFn<E> },
}

impl<E> fmt::Debug for Trace<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl<E> Trace<E> {
    pub fn name(&self) -> String {
        match self {
            Trace::Dirac => "dirac".into(),
            Trace::Trivial => "trivial".into(),
            Trace::Critical => "critical".into(),
            Trace::Custom { name, .. } => name.clone(),
        }
    }

    /// `dirac`, `trivial` or `critical`.
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "dirac" => Some(Trace::Dirac),
            "trivial" => Some(Trace::Trivial),
            "critical" => Some(Trace::Critical),
            _ => None,
        }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&E) -> BigRational + Send + Sync + 'static,
    ) -> Self {
        Trace::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `τ(g)`.
    pub fn value<A>(&self, action: &A, g: &E, caps: &Caps) -> Result<BigRational>
    where
        A: SelfSimilarAction<Element = E>,
    {
        match self {
            Trace::Dirac => Ok(indicator(is_trivial(action, g, caps)?)),
            Trace::Trivial => Ok(BigRational::one()),
            Trace::Critical => critical_value(action, g, caps),
            Trace::Custom { f, .. } => Ok(f(g)),
        }
    }

    /// `τ` on every element of the restriction closure indexing `matrix`.
    fn vector<A>(
        &self,
        action: &A,
        matrix: &TransferMatrix<E>,
        caps: &Caps,
    ) -> Result<Vec<BigRational>>
    where
        A: SelfSimilarAction<Element = E>,
        E: Clone,
    {
        Ok(match self {
            Trace::Dirac => (0..matrix.len())
                .map(|h| indicator(matrix.identity() == Some(h)))
                .collect(),
            Trace::Trivial => vec![BigRational::one(); matrix.len()],
            Trace::Critical => critical_values_of(matrix).values,
            Trace::Custom { .. } => matrix
                .index()
                .iter()
                .map(|h| self.value(action, h, caps))
                .collect::<Result<_>>()?,
        })
    }
}

fn indicator(b: bool) -> BigRational {
    if b {
        BigRational::one()
    } else {
        BigRational::zero()
    }
}

fn alphabet_size<A: SelfSimilarAction>(action: &A) -> BigRational {
    BigRational::from_integer(BigInt::from(action.alphabet().size()))
}

/// `1/|X|`, the critical value of `r`.
pub fn critical_r<A: SelfSimilarAction>(action: &A) -> BigRational {
    alphabet_size(action).recip()
}

/// Fails unless `0 < r < 1/|X|`; below the critical inverse temperature
/// there are no KMS states.
pub fn check_r<A: SelfSimilarAction>(action: &A, r: &BigRational) -> Result<()> {
    if r.is_positive() && r * alphabet_size(action) < BigRational::one() {
        Ok(())
    } else {
        Err(Error::NoKmsState {
            r: r.to_string(),
            alphabet_size: action.alphabet().size(),
        })
    }
}

/// `ψ_{r,τ}(u_g)`.
pub fn psi_value<A: SelfSimilarAction>(
    action: &A,
    r: &BigRational,
    trace: &Trace<A::Element>,
    g: &A::Element,
    caps: &Caps,
) -> Result<BigRational> {
    check_r(action, r)?;
    let matrix = TransferMatrix::build(action, g, caps)?;
    let t = trace.vector(action, &matrix, caps)?;
    let n = matrix.len();
    let system: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let a = r * BigRational::from_integer(BigInt::from(matrix.entry(i, j)));
                    if i == j {
                        BigRational::one() - a
                    } else {
                        -a
                    }
                })
                .collect()
        })
        .collect();
    let y = linalg::solve(&system, &t).expect("I − rA is strictly diagonally dominant");
    Ok((BigRational::one() - alphabet_size(action) * r) * &y[matrix.start()])
}

/// The value of the critical state on `s_v u_g s_w*`.
pub fn critical_value_state<A: SelfSimilarAction>(
    action: &A,
    term: &SpanningTerm<A::Element>,
    caps: &Caps,
) -> Result<BigRational> {
    if term.v != term.w {
        return Ok(BigRational::zero());
    }
    let c = critical_value(action, &term.g, caps)?;
    Ok(c * rational_pow(&critical_r(action), term.v.len() as i64))
}

/// The ground state of `ω` on `s_v u_g s_w*`: `ω(g)` if `v = w = ∅`, else `0`.
pub fn ground_value<A: SelfSimilarAction>(
    action: &A,
    omega: &Trace<A::Element>,
    term: &SpanningTerm<A::Element>,
    caps: &Caps,
) -> Result<BigRational> {
    if term.v.is_empty() && term.w.is_empty() {
        omega.value(action, &term.g, caps)
    } else {
        Ok(BigRational::zero())
    }
}

/// A linear functional on the spanning algebra, given on terms.
pub trait Evaluator<E: Ord + Clone>: Sync {
    fn value(&self, term: &SpanningTerm<E>) -> Result<BigRational>;

    fn evaluate(&self, c: &Combination<E>) -> Result<BigRational> {
        let mut total = BigRational::zero();
        for (t, coef) in c.terms() {
            total += coef * self.value(t)?;
        }
        Ok(total)
    }
}

#[derive(Clone, Debug)]
pub enum StateKind<E> {
    Gibbs { r: BigRational, trace: Trace<E> },
    Critical,
    Ground { omega: Trace<E> },
}

/// A state of the Toeplitz algebra with memoized values on `u_g`.
pub struct State<'s, 'a, A: SelfSimilarAction> {
    algebra: &'s Algebra<'a, A>,
    kind: StateKind<A::Element>,
    memo: Mutex<HashMap<A::Element, BigRational>>,
}

impl<'s, 'a, A: SelfSimilarAction> State<'s, 'a, A> {
    /// `ψ_{r,τ}`; requires `0 < r < 1/|X|`.
    pub fn gibbs(
        algebra: &'s Algebra<'a, A>,
        r: BigRational,
        trace: Trace<A::Element>,
    ) -> Result<Self> {
        check_r(algebra.action(), &r)?;
        Ok(Self::with_kind(algebra, StateKind::Gibbs { r, trace }))
    }

    /// The unique KMS state at `r = 1/|X|`.
    pub fn critical(algebra: &'s Algebra<'a, A>) -> Self {
        Self::with_kind(algebra, StateKind::Critical)
    }

    /// The ground state extending `ω`.
    pub fn ground(algebra: &'s Algebra<'a, A>, omega: Trace<A::Element>) -> Self {
        Self::with_kind(algebra, StateKind::Ground { omega })
    }

    fn with_kind(algebra: &'s Algebra<'a, A>, kind: StateKind<A::Element>) -> Self {
        State {
            algebra,
            kind,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn kind(&self) -> &StateKind<A::Element> {
        &self.kind
    }

    /// The `r` at which the state is KMS, if any.
    pub fn r(&self) -> Option<BigRational> {
        match &self.kind {
            StateKind::Gibbs { r, .. } => Some(r.clone()),
            StateKind::Critical => Some(critical_r(self.algebra.action())),
            StateKind::Ground { .. } => None,
        }
    }

    /// `Φ(u_g)`.
    pub fn value_u(&self, g: &A::Element) -> Result<BigRational> {
        if let Some(v) = self.memo.lock().expect("lock").get(g) {
            return Ok(v.clone());
        }
        let action = self.algebra.action();
        let caps = self.algebra.caps();
        let v = match &self.kind {
            StateKind::Gibbs { r, trace } => psi_value(action, r, trace, g, caps)?,
            StateKind::Critical => critical_value(action, g, caps)?,
            StateKind::Ground { omega } => omega.value(action, g, caps)?,
        };
        self.memo.lock().expect("lock").insert(g.clone(), v.clone());
        Ok(v)
    }
}

impl<A: SelfSimilarAction> Evaluator<A::Element> for State<'_, '_, A> {
    fn value(&self, term: &SpanningTerm<A::Element>) -> Result<BigRational> {
        if term.v != term.w {
            return Ok(BigRational::zero());
        }
        let k = term.v.len() as i64;
        match &self.kind {
            StateKind::Gibbs { r, .. } => Ok(rational_pow(r, k) * self.value_u(&term.g)?),
            StateKind::Critical => {
                Ok(rational_pow(&critical_r(self.algebra.action()), k) * self.value_u(&term.g)?)
            }
            StateKind::Ground { .. } if k == 0 => self.value_u(&term.g),
            StateKind::Ground { .. } => Ok(BigRational::zero()),
        }
    }
}

/// An evaluator whose value on `u_target` is shifted by `delta`; used as a
/// negative control for the checkers.
pub struct Perturbed<'e, E: Ord + Clone> {
    pub inner: &'e dyn Evaluator<E>,
    pub target: E,
    pub delta: BigRational,
}

impl<E: Ord + Clone + Sync> Evaluator<E> for Perturbed<'_, E> {
    fn value(&self, term: &SpanningTerm<E>) -> Result<BigRational> {
        let v = self.inner.value(term)?;
        if term.v.is_empty() && term.w.is_empty() && term.g == self.target {
            Ok(v + &self.delta)
        } else {
            Ok(v)
        }
    }
}

/// One violated identity: the description and both sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub description: String,
    pub lhs: BigRational,
    pub rhs: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<Failure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn passes(&self) -> usize {
        self.checked - self.failures.len()
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}/{} passed",
            self.name,
            self.passes(),
            self.checked
        )?;
        for fail in self.failures.iter().take(5) {
            write!(f, "\n  {}: {} != {}", fail.description, fail.lhs, fail.rhs)?;
        }
        Ok(())
    }
}

fn collect_report<T: Sync>(
    name: &str,
    items: &[T],
    check: impl Fn(&T) -> Result<Option<Failure>> + Sync + Send,
) -> Result<CheckReport> {
    let results = items.par_iter().map(check).collect::<Result<Vec<_>>>()?;
    Ok(CheckReport {
        name: name.to_string(),
        checked: items.len(),
        failures: results.into_iter().flatten().collect(),
    })
}

fn compare(
    description: impl FnOnce() -> String,
    lhs: BigRational,
    rhs: BigRational,
) -> Option<Failure> {
    (lhs != rhs).then(|| Failure {
        description: description(),
        lhs,
        rhs,
    })
}

pub type TermPair<E> = (SpanningTerm<E>, SpanningTerm<E>);

/// Checks `Φ(ab) = r^{|v|−|w|} Φ(ba)` for `a = s_v u_g s_w*` on each pair.
pub fn kms_check<A: SelfSimilarAction>(
    algebra: &Algebra<'_, A>,
    state: &dyn Evaluator<A::Element>,
    r: &BigRational,
    pairs: &[TermPair<A::Element>],
) -> Result<CheckReport> {
    collect_report("kms", pairs, |(a, b)| {
        let lhs = match algebra.multiply_terms(a, b)? {
            Some(t) => state.value(&t)?,
            None => BigRational::zero(),
        };
        let rhs = match algebra.multiply_terms(b, a)? {
            Some(t) => state.value(&t)? * rational_pow(r, a.degree()),
            None => BigRational::zero(),
        };
        Ok(compare(
            || {
                format!(
                    "a = {}, b = {}",
                    algebra.format_term(a),
                    algebra.format_term(b)
                )
            },
            lhs,
            rhs,
        ))
    })
}

/// Checks `Φ(s_v u_g s_w*) = 0` for `v ≠ w` and `r^{|v|} Φ(u_g)` for `v = w`.
pub fn characterization_check<A: SelfSimilarAction>(
    algebra: &Algebra<'_, A>,
    state: &dyn Evaluator<A::Element>,
    r: &BigRational,
    terms: &[SpanningTerm<A::Element>],
) -> Result<CheckReport> {
    collect_report("characterization", terms, |t| {
        let lhs = state.value(t)?;
        let rhs = if t.v == t.w {
            let u = SpanningTerm {
                v: Word::empty(),
                g: t.g.clone(),
                w: Word::empty(),
            };
            rational_pow(r, t.v.len() as i64) * state.value(&u)?
        } else {
            BigRational::zero()
        };
        Ok(compare(|| algebra.format_term(t), lhs, rhs))
    })
}

/// Checks `ψ(u_g) = (1 − |X|r) τ(g) + r Σ_{x : g·x = x} ψ(u_{g|_x})`.
pub fn recursion_check<A: SelfSimilarAction>(
    action: &A,
    r: &BigRational,
    trace: &Trace<A::Element>,
    elements: &[A::Element],
    caps: &Caps,
) -> Result<CheckReport> {
    collect_report("recursion", elements, |g| {
        let lhs = psi_value(action, r, trace, g, caps)?;
        let mut sum = BigRational::zero();
        for x in 0..action.alphabet().size() {
            if action.act_letter(g, x) == x {
                sum += psi_value(action, r, trace, &action.restrict_letter(g, x), caps)?;
            }
        }
        let rhs = (BigRational::one() - alphabet_size(action) * r)
            * trace.value(action, g, caps)?
            + r * sum;
        Ok(compare(|| action.format_element(g), lhs, rhs))
    })
}

/// Checks `φ(u_g) = |X|^{−k} Σ_{w ∈ X^k, g·w = w} φ(u_{g|_w})` for the
/// critical state.
pub fn cuntz_check<A: SelfSimilarAction>(
    action: &A,
    elements: &[A::Element],
    k: usize,
    caps: &Caps,
) -> Result<CheckReport> {
    let words: Vec<Word> = action.alphabet().words(k).collect();
    collect_report("cuntz", elements, |g| {
        let lhs = critical_value(action, g, caps)?;
        let mut sum = BigRational::zero();
        for w in &words {
            let (image, restricted) = act_and_restrict(action, g, w);
            if &image == w {
                sum += critical_value(action, &restricted, caps)?;
            }
        }
        let rhs = sum * rational_pow(&critical_r(action), k as i64);
        Ok(compare(|| action.format_element(g), lhs, rhs))
    })
}

/// Checks `Φ(s_v u_g s_w*) = ω(g)` when `v = w = ∅` and `0` otherwise.
pub fn ground_check<A: SelfSimilarAction>(
    algebra: &Algebra<'_, A>,
    state: &dyn Evaluator<A::Element>,
    omega: &Trace<A::Element>,
    terms: &[SpanningTerm<A::Element>],
) -> Result<CheckReport> {
    collect_report("ground", terms, |t| {
        let lhs = state.value(t)?;
        let rhs = if t.v.is_empty() && t.w.is_empty() {
            omega.value(algebra.action(), &t.g, algebra.caps())?
        } else {
            BigRational::zero()
        };
        Ok(compare(|| algebra.format_term(t), lhs, rhs))
    })
}

/// Checks `τ(gh) = τ(hg)` on each pair.
pub fn trace_property_check<A: SelfSimilarAction>(
    action: &A,
    trace: &Trace<A::Element>,
    pairs: &[(A::Element, A::Element)],
    caps: &Caps,
) -> Result<CheckReport> {
    collect_report("trace", pairs, |(g, h)| {
        let lhs = trace.value(action, &action.compose(g, h), caps)?;
        let rhs = trace.value(action, &action.compose(h, g), caps)?;
        Ok(compare(
            || format!("{}, {}", action.format_element(g), action.format_element(h)),
            lhs,
            rhs,
        ))
    })
}
