//! The self-similar action of `ℤ^d` determined by an integer matrix `A` with
//! `|det A| ≥ 2` and a digit set `Σ` of coset representatives of `ℤ^d / Bℤ^d`,
//! where `B = Aᵀ`.
//!
//! For `n ∈ ℤ^d` and a digit `x`, `n·x = c(n + x)` and
//! `n|_x = B⁻¹(n + x − c(n + x))`, where `c(m)` is the digit congruent to `m`.

use std::collections::HashMap;
use std::fmt;

use nalgebra::DMatrix;
use num::{BigInt, BigRational, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::action::SelfSimilarAction;
use crate::alphabet::{Alphabet, Letter, Word};
use crate::error::{Error, Result};
use crate::linalg;

/// A square integer matrix with `|det| ≥ 2`, together with the data needed to
/// reduce modulo `Bℤ^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    a: Vec<Vec<i64>>,
    b: Vec<Vec<i64>>,
    det: i128,
    /// `adj(B)`, so that `B⁻¹ = adj(B) / det(B)`.
    adj: Vec<Vec<i128>>,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidMatrixAction(
                "matrix must be square and non-empty".into(),
            ));
        }
        let b: Vec<Vec<i64>> = (0..d)
            .map(|i| (0..d).map(|j| rows[j][i]).collect())
            .collect();
        let bq: Vec<Vec<BigRational>> = b
            .iter()
            .map(|r| {
                r.iter()
                    .map(|&v| BigRational::from_integer(v.into()))
                    .collect()
            })
            .collect();
        let det_q = linalg::determinant(&bq);
        let det = det_q
            .to_integer()
            .to_i128()
            .ok_or_else(|| Error::InvalidMatrixAction("determinant too large".into()))?;
        if det.abs() < 2 {
            return Err(Error::InvalidMatrixAction(format!(
                "|det A| must be at least 2, got {}",
                det.abs()
            )));
        }
        let inv = linalg::inverse(&bq).expect("non-zero determinant");
        let adj =
            inv.iter()
                .map(|r| {
                    r.iter()
                        .map(|v| {
                            (v * &det_q).to_integer().to_i128().ok_or_else(|| {
                                Error::InvalidMatrixAction("entries too large".into())
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix {
            a: rows,
            b,
            det,
            adj,
        })
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.a
    }

    /// `B = Aᵀ`.
    pub fn transpose(&self) -> &[Vec<i64>] {
        &self.b
    }

    /// `N = |det A|`.
    pub fn index(&self) -> usize {
        self.det.unsigned_abs() as usize
    }

    /// Complete invariant of the class of `n` in `ℤ^d / Bℤ^d`.
    fn class_key(&self, n: &[i128]) -> Vec<i128> {
        let m = self.det.abs();
        self.adj
            .iter()
            .map(|row| {
                row.iter()
                    .zip(n)
                    .map(|(a, v)| a * v)
                    .sum::<i128>()
                    .rem_euclid(m)
            })
            .collect()
    }

    /// `B⁻¹ m`, which must be integral.
    fn divide(&self, m: &[i128]) -> Vec<i64> {
        self.adj
            .iter()
            .map(|row| {
                let s: i128 = row.iter().zip(m).map(|(a, v)| a * v).sum();
                debug_assert_eq!(s % self.det, 0);
                i64::try_from(s / self.det).expect("restriction fits in i64")
            })
            .collect()
    }

    fn apply_b(&self, n: &[i64]) -> Vec<i64> {
        self.b
            .iter()
            .map(|row| row.iter().zip(n).map(|(a, v)| a * v).sum())
            .collect()
    }

    /// Whether every complex eigenvalue has modulus greater than `1 + tol`.
    /// Computed in floating point and only advisory.
    pub fn is_dilation(&self, tol: f64) -> std::result::Result<bool, Undetermined> {
        let d = self.dim();
        let m = DMatrix::from_fn(d, d, |i, j| self.a[i][j] as f64);
        let schur =
            nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or(Undetermined)?;
        let eigen = schur.complex_eigenvalues();
        Ok(eigen.iter().all(|l| l.norm() > 1.0 + tol))
    }
}

/// The eigenvalue solver did not converge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Undetermined;

impl fmt::Display for Undetermined {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("undetermined")
    }
}

/// A transversal of `ℤ^d / Bℤ^d` containing `0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitSet {
    digits: Vec<Vec<i64>>,
}

impl DigitSet {
    pub fn new(matrix: &IntMatrix, digits: Vec<Vec<i64>>) -> Result<Self> {
        let d = matrix.dim();
        if digits.len() != matrix.index() {
            return Err(Error::InvalidMatrixAction(format!(
                "expected {} digits, got {}",
                matrix.index(),
                digits.len()
            )));
        }
        if let Some(v) = digits.iter().find(|v| v.len() != d) {
            return Err(Error::InvalidMatrixAction(format!(
                "digit {v:?} does not have dimension {d}"
            )));
        }
        if !digits.iter().any(|v| v.iter().all(|&c| c == 0)) {
            return Err(Error::InvalidMatrixAction(
                "digit set must contain 0".into(),
            ));
        }
        let mut seen = HashMap::new();
        for v in &digits {
            let key = matrix.class_key(&widen(v));
            if let Some(prev) = seen.insert(key, v.clone()) {
                return Err(Error::InvalidMatrixAction(format!(
                    "digits {prev:?} and {v:?} are congruent modulo B"
                )));
            }
        }
        Ok(DigitSet { digits })
    }

    pub fn digits(&self) -> &[Vec<i64>] {
        &self.digits
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }
}

fn widen(v: &[i64]) -> Vec<i128> {
    v.iter().map(|&c| c as i128).collect()
}

/// Vectors of sup-norm exactly `s`, ordered by number of negative
/// coordinates and then lexicographically.
fn shell(d: usize, s: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut v = vec![-s; d];
    loop {
        if v.iter().map(|c| c.abs()).max().unwrap_or(0) == s {
            out.push(v.clone());
        }
        let mut i = d;
        loop {
            if i == 0 {
                out.sort_by_key(|v| (v.iter().filter(|&&c| c < 0).count(), v.clone()));
                return out;
            }
            i -= 1;
            if v[i] < s {
                v[i] += 1;
                break;
            }
            v[i] = -s;
        }
    }
}

/// A digit set found by searching `ℤ^d` outward from `0` in sup-norm shells.
///
/// Within a shell, vectors with fewer negative coordinates come first, then
/// lexicographic order. For `B = [2]` this gives `{0, 1}`, for `B = [−3]`
/// `{0, 1, −1}`, and for `B = 2I` the four `0/1` vectors.
pub fn default_digits(matrix: &IntMatrix) -> DigitSet {
    let d = matrix.dim();
    let n = matrix.index();
    let mut keys = HashMap::new();
    let mut digits = Vec::with_capacity(n);
    let mut s = 0;
    while digits.len() < n {
        for v in shell(d, s) {
            let key = matrix.class_key(&widen(&v));
            if let std::collections::hash_map::Entry::Vacant(e) = keys.entry(key) {
                e.insert(());
                digits.push(v);
                if digits.len() == n {
                    break;
                }
            }
        }
        s += 1;
    }
    DigitSet { digits }
}

/// A group element `n ∈ ℤ^d`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZdElement(pub Vec<i64>);

fn format_vector(v: &[i64]) -> String {
    if v.len() == 1 {
        v[0].to_string()
    } else {
        let parts: Vec<String> = v.iter().map(i64::to_string).collect();
        format!("({})", parts.join(","))
    }
}

/// The action `(ℤ^d, Σ)`.
#[derive(Clone, Debug)]
pub struct ZdAction {
    matrix: IntMatrix,
    digits: DigitSet,
    alphabet: Alphabet,
    digit_of: HashMap<Vec<i128>, Letter>,
    dilation: std::result::Result<bool, Undetermined>,
}

impl ZdAction {
    pub fn new(matrix: IntMatrix, digits: DigitSet) -> Result<Self> {
        let digits = DigitSet::new(&matrix, digits.digits)?;
        let alphabet = Alphabet::new(digits.digits.iter().map(|v| format_vector(v)))?;
        let digit_of = digits
            .digits
            .iter()
            .enumerate()
            .map(|(i, v)| (matrix.class_key(&widen(v)), i))
            .collect();
        let dilation = matrix.is_dilation(1e-9);
        Ok(ZdAction {
            matrix,
            digits,
            alphabet,
            digit_of,
            dilation,
        })
    }

    /// The action with the default digit set.
    pub fn with_default_digits(rows: Vec<Vec<i64>>) -> Result<Self> {
        let matrix = IntMatrix::new(rows)?;
        let digits = default_digits(&matrix);
        ZdAction::new(matrix, digits)
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn digits(&self) -> &DigitSet {
        &self.digits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Advisory dilation flag computed at construction.
    pub fn is_dilation(&self) -> std::result::Result<bool, Undetermined> {
        self.dilation
    }

    pub fn element(&self, v: &[i64]) -> ZdElement {
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        ZdElement(v.to_vec())
    }

    fn coset_rep_wide(&self, n: &[i128]) -> Letter {
        match self.digit_of.get(&self.matrix.class_key(n)) {
            Some(&x) => x,
            None => panic!("digit set is not a transversal"),
        }
    }

    /// The letter whose digit is congruent to `n` modulo `Bℤ^d`.
    pub fn coset_rep(&self, n: &ZdElement) -> Letter {
        self.coset_rep_wide(&widen(&n.0))
    }

    /// `b(w) = w₁ + B w₂ + ⋯ + B^{k−1} w_k`.
    pub fn digit_expansion(&self, w: &Word) -> ZdElement {
        let mut acc = vec![0i64; self.dim()];
        for x in w.letters().iter().rev() {
            acc = self.matrix.apply_b(&acc);
            for (a, c) in acc.iter_mut().zip(&self.digits.digits[*x]) {
                *a += c;
            }
        }
        ZdElement(acc)
    }

    fn shifted(&self, n: &ZdElement, x: Letter) -> Vec<i128> {
        n.0.iter()
            .zip(&self.digits.digits[x])
            .map(|(&a, &b)| a as i128 + b as i128)
            .collect()
    }
}

impl SelfSimilarAction for ZdAction {
    type Element = ZdElement;

    fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    fn identity(&self) -> ZdElement {
        ZdElement(vec![0; self.dim()])
    }

    fn act_letter(&self, n: &ZdElement, x: Letter) -> Letter {
        self.coset_rep_wide(&self.shifted(n, x))
    }

    fn restrict_letter(&self, n: &ZdElement, x: Letter) -> ZdElement {
        let m = self.shifted(n, x);
        let c = self.coset_rep_wide(&m);
        let diff: Vec<i128> = m
            .iter()
            .zip(&self.digits.digits[c])
            .map(|(&a, &b)| a - b as i128)
            .collect();
        ZdElement(self.matrix.divide(&diff))
    }

    fn compose(&self, g: &ZdElement, h: &ZdElement) -> ZdElement {
        ZdElement(g.0.iter().zip(&h.0).map(|(a, b)| a + b).collect())
    }

    fn invert(&self, g: &ZdElement) -> ZdElement {
        ZdElement(g.0.iter().map(|a| -a).collect())
    }

    fn generators(&self) -> Vec<ZdElement> {
        let d = self.dim();
        (0..d)
            .map(|i| ZdElement((0..d).map(|j| i64::from(i == j)).collect()))
            .collect()
    }

    fn format_element(&self, g: &ZdElement) -> String {
        format_vector(&g.0)
    }

    fn parse_element(&self, text: &str) -> Result<ZdElement> {
        let trimmed = text.trim();
        let inner = trimmed
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .unwrap_or(trimmed);
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != self.dim() {
            return Err(Error::parse(
                0,
                format!(
                    "expected a vector of dimension {}, got {text:?}",
                    self.dim()
                ),
            ));
        }
        let v = parts
            .iter()
            .map(|p| {
                p.parse::<i64>()
                    .map_err(|_| Error::parse(0, format!("invalid integer {p:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ZdElement(v))
    }

    fn is_identity(&self, g: &ZdElement) -> bool {
        g.0.iter().all(|&c| c == 0)
    }
}

/// `"auto"` or an explicit list of digits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DigitChoice {
    Auto(String),
    Explicit(Vec<Vec<i64>>),
}

/// JSON form `{"type": "zd", "matrix": [[...]], "digits": [[...]] | "auto"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZdDocument {
    #[serde(rename = "type")]
    pub kind: String,
    pub matrix: Vec<Vec<i64>>,
    #[serde(default = "auto_digits")]
    pub digits: DigitChoice,
}

fn auto_digits() -> DigitChoice {
    DigitChoice::Auto("auto".into())
}

impl ZdAction {
    pub fn from_document(doc: &ZdDocument) -> Result<Self> {
        if doc.kind != "zd" {
            return Err(Error::Document(format!(
                "unexpected action type {:?}",
                doc.kind
            )));
        }
        let matrix = IntMatrix::new(doc.matrix.clone())?;
        let digits = match &doc.digits {
            DigitChoice::Auto(s) if s == "auto" => default_digits(&matrix),
            DigitChoice::Auto(s) => {
                return Err(Error::Document(format!(
                    "digits must be a list or \"auto\", got {s:?}"
                )))
            }
            DigitChoice::Explicit(v) => DigitSet::new(&matrix, v.clone())?,
        };
        ZdAction::new(matrix, digits)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ZdDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        ZdAction::from_document(&doc)
    }

    pub fn to_document(&self) -> ZdDocument {
        ZdDocument {
            kind: "zd".into(),
            matrix: self.matrix.a.clone(),
            digits: DigitChoice::Explicit(self.digits.digits.clone()),
        }
    }
}

/// Exact rational `B⁻¹`, exposed for tests and diagnostics.
pub fn inverse_transpose(matrix: &IntMatrix) -> Vec<Vec<BigRational>> {
    let det = BigRational::from_integer(BigInt::from(matrix.det));
    matrix
        .adj
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| BigRational::from_integer(BigInt::from(v)) / &det)
                .collect()
        })
        .collect()
}

/// Whether `n ∈ Bℤ^d`, decided by solving `B m = n` over the rationals.
pub fn in_lattice(matrix: &IntMatrix, n: &[i64]) -> bool {
    let b: Vec<Vec<BigRational>> = matrix
        .b
        .iter()
        .map(|r| {
            r.iter()
                .map(|&v| BigRational::from_integer(v.into()))
                .collect()
        })
        .collect();
    let rhs: Vec<BigRational> = n
        .iter()
        .map(|&v| BigRational::from_integer(v.into()))
        .collect();
    match linalg::solve(&b, &rhs) {
        Some(m) => m.iter().all(|v| v.is_integer()),
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::act_word;

    fn d1(n: i64) -> ZdAction {
        ZdAction::with_default_digits(vec![vec![n]]).unwrap()
    }

    #[test]
    fn default_digit_sets() {
        assert_eq!(d1(2).digits().digits(), &[vec![0], vec![1]]);
        assert_eq!(d1(-3).digits().digits(), &[vec![0], vec![1], vec![-1]]);
        let two = ZdAction::with_default_digits(vec![vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!(
            two.digits().digits(),
            &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }

    #[test]
    fn act_and_restrict_examples() {
        let a = d1(2);
        let one = a.element(&[1]);
        assert_eq!(a.act_letter(&one, 1), 0);
        assert_eq!(a.restrict_letter(&one, 1), a.element(&[1]));
        let minus = a.element(&[-1]);
        assert_eq!(a.act_letter(&minus, 0), 1);
        assert_eq!(a.restrict_letter(&minus, 0), a.element(&[-1]));
        let zero = a.identity();
        for x in 0..2 {
            assert_eq!(a.act_letter(&zero, x), x);
            assert_eq!(a.restrict_letter(&zero, x), zero);
        }
    }

    #[test]
    fn digit_expansions() {
        let a = d1(2);
        assert_eq!(a.digit_expansion(&Word::from([1, 1])), a.element(&[3]));
        assert_eq!(a.digit_expansion(&Word::empty()), a.element(&[0]));
        let m = IntMatrix::new(vec![vec![4]]).unwrap();
        let digits = DigitSet::new(&m, vec![vec![0], vec![1], vec![2], vec![3]]).unwrap();
        let b = ZdAction::new(m, digits).unwrap();
        assert_eq!(b.digit_expansion(&Word::from([3, 0])), b.element(&[3]));
    }

    #[test]
    fn dilation_flags() {
        let m = |r: Vec<Vec<i64>>| IntMatrix::new(r).unwrap();
        assert_eq!(m(vec![vec![2, 0], vec![0, 2]]).is_dilation(1e-9), Ok(true));
        assert_eq!(m(vec![vec![1, 1], vec![0, 2]]).is_dilation(1e-9), Ok(false));
        assert_eq!(m(vec![vec![0, 2], vec![1, 0]]).is_dilation(1e-9), Ok(true));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(IntMatrix::new(vec![vec![1]]).is_err());
        assert!(IntMatrix::new(vec![vec![1, 0], vec![0, 1]]).is_err());
        assert!(IntMatrix::new(vec![vec![2, 0]]).is_err());
        let m = IntMatrix::new(vec![vec![2]]).unwrap();
        assert!(DigitSet::new(&m, vec![vec![0], vec![2]]).is_err());
        assert!(DigitSet::new(&m, vec![vec![1], vec![3]]).is_err());
        assert!(DigitSet::new(&m, vec![vec![0], vec![-1]]).is_ok());
    }

    #[test]
    fn lattice_membership_agrees_with_keys() {
        let m = IntMatrix::new(vec![vec![1, 1], vec![-1, 1]]).unwrap();
        for x in -4..=4 {
            for y in -4..=4 {
                let key_zero = m.class_key(&[x, y]).iter().all(|&k| k == 0);
                assert_eq!(key_zero, in_lattice(&m, &[x as i64, y as i64]), "{x},{y}");
            }
        }
    }

    #[test]
    fn json_documents() {
        let a =
            ZdAction::from_json(r#"{"type":"zd","matrix":[[2,0],[0,2]],"digits":"auto"}"#).unwrap();
        assert_eq!(a.alphabet().size(), 4);
        assert_eq!(a.alphabet().name(1), "(0,1)");
        let b =
            ZdAction::from_json(r#"{"type":"zd","matrix":[[3]],"digits":[[0],[1],[5]]}"#).unwrap();
        assert_eq!(b.alphabet().names(), &["0", "1", "5"]);
        // 1 + 1 = 2 ≡ 5 mod 3
        assert_eq!(
            act_word(&b, &b.element(&[1]), &Word::from([1])).unwrap(),
            Word::from([2])
        );
        assert!(ZdAction::from_json(r#"{"type":"zd","matrix":[[3]],"digits":"none"}"#).is_err());
        assert!(ZdAction::from_json(r#"{"type":"zd","matrix":[[3]],"extra":1}"#).is_err());
    }

    #[test]
    fn parse_and_format() {
        let a = ZdAction::with_default_digits(vec![vec![2, 0], vec![0, 2]]).unwrap();
        let v = a.parse_element("(1, -2)").unwrap();
        assert_eq!(v, a.element(&[1, -2]));
        assert_eq!(a.format_element(&v), "(1,-2)");
        assert!(a.parse_element("(1)").is_err());
        assert_eq!(d1(2).parse_element("-3").unwrap(), ZdElement(vec![-3]));
    }
}
