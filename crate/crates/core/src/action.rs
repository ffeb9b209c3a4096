//! The backend-independent calculus of self-similar actions.
//!
//! A backend supplies the one-letter maps `g·x` and `g|_x` together with
//! composition and inversion; everything else (acting on words, restricting
//! to words, fingerprints) is derived here from the self-similarity identity
//! `g·(xw) = (g·x)(g|_x·w)`.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use sha2::{Digest, Sha256};

use crate::alphabet::{Alphabet, Letter, Word};
use crate::error::{Error, Result};

/// A faithful self-similar action of a group on the words over a finite
/// alphabet.
///
/// Elements are plain values; two syntactically different elements may act
/// identically. Semantic equality is decided by [`crate::closure::exact_equal`].
pub trait SelfSimilarAction: Send + Sync {
    type Element: Clone + Eq + Hash + Ord + Debug + Send + Sync;

    fn alphabet(&self) -> &Alphabet;

    fn identity(&self) -> Self::Element;

    /// `g·x` for a single letter.
    fn act_letter(&self, g: &Self::Element, x: Letter) -> Letter;

    /// `g|_x` for a single letter.
    fn restrict_letter(&self, g: &Self::Element, x: Letter) -> Self::Element;

    /// The product `gh`, acting as `v ↦ g·(h·v)`.
    fn compose(&self, g: &Self::Element, h: &Self::Element) -> Self::Element;

    fn invert(&self, g: &Self::Element) -> Self::Element;

    /// Generating set used by nucleus computations and random sampling.
    fn generators(&self) -> Vec<Self::Element>;

    fn format_element(&self, g: &Self::Element) -> String;

    /// Parses a group word such as `a b^-1 a`.
    fn parse_element(&self, text: &str) -> Result<Self::Element>;

    /// Syntactic identity test. Backends may return `false` for elements that
    /// only act trivially; semantic checks go through the closure machinery.
    fn is_identity(&self, g: &Self::Element) -> bool {
        *g == self.identity()
    }
}

/// Computes `g·v` and `g|_v` in one pass, threading restrictions letter by
/// letter. Letters are assumed to be in range.
pub(crate) fn act_and_restrict<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    v: &Word,
) -> (Word, A::Element) {
    let mut current = g.clone();
    let mut out = Vec::with_capacity(v.len());
    for x in v.iter() {
        out.push(action.act_letter(&current, x));
        current = action.restrict_letter(&current, x);
    }
    (Word(out), current)
}

/// `g·v`.
pub fn act_word<A: SelfSimilarAction>(action: &A, g: &A::Element, v: &Word) -> Result<Word> {
    action.alphabet().check(v)?;
    Ok(act_and_restrict(action, g, v).0)
}

/// `g|_v`.
pub fn restrict_word<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    v: &Word,
) -> Result<A::Element> {
    action.alphabet().check(v)?;
    Ok(act_and_restrict(action, g, v).1)
}

/// `g·v` together with `g|_v`.
pub fn act_restrict_word<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    v: &Word,
) -> Result<(Word, A::Element)> {
    action.alphabet().check(v)?;
    Ok(act_and_restrict(action, g, v))
}

/// Product of a sequence of elements, left to right.
pub fn product<'a, A: SelfSimilarAction>(
    action: &A,
    factors: impl IntoIterator<Item = &'a A::Element>,
) -> A::Element
where
    A::Element: 'a,
{
    factors
        .into_iter()
        .fold(action.identity(), |acc, f| action.compose(&acc, f))
}

/// SHA-256 digest of the action of an element on all words of length at most
/// the requested depth.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint(pub [u8; 32]);

impl Debug for Fingerprint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

/// Digest of the portrait of `g` down to `depth`.
///
/// Two elements that agree on `X^{≤depth}` get the same digest. The digest
/// only depends on the action, so it is stable across runs.
pub fn portrait_fingerprint<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    depth: usize,
) -> Fingerprint {
    let mut memo = HashMap::new();
    fingerprint_rec(action, g, depth, &mut memo)
}

fn fingerprint_rec<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    depth: usize,
    memo: &mut HashMap<(A::Element, usize), Fingerprint>,
) -> Fingerprint {
    if depth == 0 {
        return Fingerprint(Sha256::digest(b"portrait/0").into());
    }
    if let Some(fp) = memo.get(&(g.clone(), depth)) {
        return *fp;
    }
    let size = action.alphabet().size();
    let mut hasher = Sha256::new();
    hasher.update(b"portrait/");
    hasher.update((depth as u64).to_le_bytes());
    for x in 0..size {
        hasher.update((action.act_letter(g, x) as u64).to_le_bytes());
    }
    for x in 0..size {
        let child = action.restrict_letter(g, x);
        let fp = fingerprint_rec(action, &child, depth - 1, memo);
        hasher.update(fp.0);
    }
    let fp = Fingerprint(hasher.finalize().into());
    memo.insert((g.clone(), depth), fp);
    fp
}

/// Checks that `g` permutes `X^n` for every `n ≤ depth`. Faithfulness of a
/// user-supplied action cannot be decided in general; this is the bounded
/// check used when loading machines.
pub fn check_bijective_to_depth<A: SelfSimilarAction>(
    action: &A,
    g: &A::Element,
    depth: usize,
) -> Result<()> {
    let alphabet = action.alphabet();
    for n in 0..=depth {
        let mut seen = std::collections::HashSet::new();
        for v in alphabet.words(n) {
            let image = act_and_restrict(action, g, &v).0;
            if !seen.insert(image) {
                return Err(Error::InvalidArgument(format!(
                    "{} is not injective on words of length {n}",
                    action.format_element(g)
                )));
            }
        }
    }
    Ok(())
}
