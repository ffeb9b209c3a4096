//! Alphabets and words over them.
//!
//! Letters are stored as indices `0..|X|`; symbolic names are only used when
//! parsing and printing.

use std::fmt;

use crate::error::{Error, Result};

/// Index of a letter in its alphabet.
pub type Letter = usize;

/// A finite ordered alphabet of distinct symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet {
    letters: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(letters: impl IntoIterator<Item = S>) -> Result<Self> {
        let letters: Vec<String> = letters.into_iter().map(Into::into).collect();
        if letters.is_empty() {
            return Err(Error::InvalidArgument("alphabet must not be empty".into()));
        }
        for (i, l) in letters.iter().enumerate() {
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!(
                    "letter {l:?} must be non-empty and contain no whitespace"
                )));
            }
            if letters[..i].contains(l) {
                return Err(Error::InvalidArgument(format!("duplicate letter {l:?}")));
            }
        }
        Ok(Alphabet { letters })
    }

    /// Alphabet `{0, 1, ..., n-1}` with decimal names.
    pub fn numeric(n: usize) -> Self {
        Alphabet {
            letters: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.letters.len()
    }

    pub fn name(&self, x: Letter) -> &str {
        &self.letters[x]
    }

    pub fn names(&self) -> &[String] {
        &self.letters
    }

    pub fn index_of(&self, name: &str) -> Option<Letter> {
        self.letters.iter().position(|l| l == name)
    }

    pub fn check(&self, word: &Word) -> Result<()> {
        match word.iter().find(|&x| x >= self.size()) {
            Some(letter) => Err(Error::AlphabetMismatch {
                letter,
                size: self.size(),
            }),
            None => Ok(()),
        }
    }

    /// All words of length `n` in lexicographic order of letter indices.
    pub fn words(&self, n: usize) -> WordsOfLength {
        WordsOfLength {
            size: self.size(),
            current: if self.size() == 0 && n > 0 {
                None
            } else {
                Some(vec![0; n])
            },
        }
    }

    /// Renders a word: letter names are concatenated when every name is a
    /// single character, and space-separated otherwise.
    pub fn format_word(&self, word: &Word) -> String {
        if word.is_empty() {
            return "∅".to_string();
        }
        let sep = if self.letters.iter().all(|l| l.chars().count() == 1) {
            ""
        } else {
            " "
        };
        word.iter()
            .map(|x| self.letters[x].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Parses a word by greedy longest match against letter names. Whitespace
    /// between letters is ignored.
    pub fn parse_word(&self, text: &str) -> Result<Word> {
        self.parse_word_at(text, 0)
    }

    pub(crate) fn parse_word_at(&self, text: &str, offset: usize) -> Result<Word> {
        let mut letters = Vec::new();
        let mut pos = 0;
        while pos < text.len() {
            let rest = &text[pos..];
            let c = rest.chars().next().expect("non-empty");
            if c.is_whitespace() {
                pos += c.len_utf8();
                continue;
            }
            let best = self
                .letters
                .iter()
                .enumerate()
                .filter(|(_, l)| rest.starts_with(l.as_str()))
                .max_by_key(|(_, l)| l.len());
            match best {
                Some((i, l)) => {
                    letters.push(i);
                    pos += l.len();
                }
                None => {
                    return Err(Error::parse(
                        offset + pos,
                        format!("unknown letter at {rest:?}"),
                    ))
                }
            }
        }
        Ok(Word(letters))
    }
}

/// A finite word over an alphabet, stored as letter indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Letter> + '_ {
        self.0.iter().copied()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// If `self = prefix · rest`, returns `rest`.
    pub fn strip_prefix(&self, prefix: &Word) -> Option<Word> {
        self.0
            .strip_prefix(prefix.0.as_slice())
            .map(|r| Word(r.to_vec()))
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl<const N: usize> From<[Letter; N]> for Word {
    fn from(v: [Letter; N]) -> Self {
        Word(v.to_vec())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Iterator over `X^n` in lexicographic order.
pub struct WordsOfLength {
    size: usize,
    current: Option<Vec<Letter>>,
}

impl Iterator for WordsOfLength {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().expect("checked above");
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.size {
                break;
            }
            cur[i] = 0;
        }
        Some(Word(out))
    }
}
