//! Free groups on finitely many symbol families, with the automorphism `T`
//! induced by a bijection of the symbols.
//!
//! A family is either a `Cycle` of length `m` (indices `0..m`, `T` adds one
//! modulo `m`) or a `Shift` (any signed index, `T` adds one). Every element
//! is stored as a canonical run-length reduced word, so group equality is
//! structural equality.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Position of a family inside its [`Alphabet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FamilyId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymbolId {
    pub family: FamilyId,
    pub index: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FamilyKind {
    Cycle { length: u32 },
    Shift,
}

/// JSON form: `{"name": "c", "kind": "cycle", "length": 3}` or
/// `{"name": "s", "kind": "shift"}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily", into = "RawFamily")]
pub struct Family {
    pub name: String,
    pub kind: FamilyKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<u32>,
}

impl TryFrom<RawFamily> for Family {
    type Error = String;

    fn try_from(raw: RawFamily) -> std::result::Result<Self, String> {
        let kind = match (raw.kind.as_str(), raw.length) {
            ("shift", None) => FamilyKind::Shift,
            ("cycle", Some(length)) => FamilyKind::Cycle { length },
            ("cycle", None) => return Err(format!("cycle family `{}` needs a length", raw.name)),
            ("shift", Some(_)) => return Err(format!("shift family `{}` takes no length", raw.name)),
            (other, _) => return Err(format!("unknown family kind `{other}`")),
        };
        Ok(Family { name: raw.name, kind })
    }
}

impl From<Family> for RawFamily {
    fn from(f: Family) -> Self {
        let (kind, length) = match f.kind {
            FamilyKind::Shift => ("shift", None),
            FamilyKind::Cycle { length } => ("cycle", Some(length)),
        };
        RawFamily { name: f.name, kind: kind.to_string(), length }
    }
}

/// The declared symbol families. Together they describe both the generating
/// set of the free group and the bijection inducing `T`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Alphabet {
    families: Vec<Family>,
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            families: Vec<Family>,
        }
        let raw = Raw::deserialize(d)?;
        Alphabet::new(raw.families).map_err(serde::de::Error::custom)
    }
}

/// One maximal block `symbol^exponent` of a reduced word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    pub symbol: SymbolId,
    pub exp: i64,
}

/// A freely reduced word. Adjacent runs always carry distinct symbols and
/// no exponent is zero, so equal group elements have identical runs.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReducedWord {
    runs: Vec<Run>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitClass {
    Finite(u64),
    Infinite,
}

impl OrbitClass {
    pub fn is_finite(self) -> bool {
        matches!(self, OrbitClass::Finite(_))
    }
}

impl ReducedWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn letter(symbol: SymbolId, exp: i64) -> Self {
        let mut w = Self::identity();
        w.push_run(Run { symbol, exp });
        w
    }

    /// Reduces an arbitrary run sequence (zero exponents and repeated or
    /// cancelling neighbours are allowed).
    pub fn from_runs<I: IntoIterator<Item = Run>>(runs: I) -> Self {
        let mut w = Self::identity();
        for run in runs {
            w.push_run(run);
        }
        w
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn is_identity(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of leading letters shared with `other`.
    pub fn common_prefix_len(&self, other: &ReducedWord) -> u64 {
        let mut n = 0;
        for (a, b) in self.runs.iter().zip(&other.runs) {
            if a == b {
                n += a.exp.unsigned_abs();
                continue;
            }
            if a.symbol == b.symbol && a.exp.signum() == b.exp.signum() {
                n += a.exp.unsigned_abs().min(b.exp.unsigned_abs());
            }
            break;
        }
        n
    }

    /// Last letter as a symbol and a sign.
    pub fn last_letter(&self) -> Option<(SymbolId, i64)> {
        self.runs.last().map(|r| (r.symbol, r.exp.signum()))
    }

    /// Number of letters, i.e. the word length in the free generators.
    pub fn len(&self) -> u64 {
        self.runs.iter().map(|r| r.exp.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    fn push_run(&mut self, run: Run) {
        if run.exp == 0 {
            return;
        }
        match self.runs.last_mut() {
            Some(last) if last.symbol == run.symbol => {
                last.exp += run.exp;
                if last.exp == 0 {
                    self.runs.pop();
                }
            }
            _ => self.runs.push(run),
        }
    }

    /// Group product `self · other`.
    pub fn concat(&self, other: &ReducedWord) -> ReducedWord {
        let mut out = self.clone();
        out.append(other);
        out
    }

    /// In-place right multiplication.
    pub fn append(&mut self, other: &ReducedWord) {
        // Only the junction can cancel; once a run survives, the rest of
        // `other` is already reduced.
        let mut rest = other.runs.iter();
        for run in rest.by_ref() {
            let before = self.runs.len();
            let merged = matches!(self.runs.last(), Some(l) if l.symbol == run.symbol);
            self.push_run(*run);
            if !(merged && self.runs.len() < before) {
                break;
            }
        }
        self.runs.extend(rest.copied());
    }

    pub fn inverse(&self) -> ReducedWord {
        ReducedWord {
            runs: self
                .runs
                .iter()
                .rev()
                .map(|r| Run { symbol: r.symbol, exp: -r.exp })
                .collect(),
        }
    }

    /// Applies an injective symbol map letterwise; the result stays reduced.
    pub fn map_symbols<F: FnMut(SymbolId) -> SymbolId>(&self, mut f: F) -> ReducedWord {
        ReducedWord {
            runs: self
                .runs
                .iter()
                .map(|r| Run { symbol: f(r.symbol), exp: r.exp })
                .collect(),
        }
    }

    pub fn symbols(&self) -> impl Iterator<Item = SymbolId> + '_ {
        self.runs.iter().map(|r| r.symbol)
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Alphabet {
    pub fn new(families: Vec<Family>) -> Result<Self> {
        for (i, fam) in families.iter().enumerate() {
            if !is_identifier(&fam.name) {
                return Err(Error::InvalidAlphabet(format!("bad family name `{}`", fam.name)));
            }
            if families[..i].iter().any(|f| f.name == fam.name) {
                return Err(Error::InvalidAlphabet(format!("duplicate family `{}`", fam.name)));
            }
            if let FamilyKind::Cycle { length: 0 } = fam.kind {
                return Err(Error::InvalidAlphabet(format!("cycle `{}` has length 0", fam.name)));
            }
        }
        Ok(Self { families })
    }

    /// Convenience constructor from `(name, kind)` pairs.
    pub fn from_pairs(pairs: &[(&str, FamilyKind)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|(name, kind)| Family { name: (*name).to_string(), kind: *kind })
                .collect(),
        )
    }

    pub fn families(&self) -> &[Family] {
        &self.families
    }

    pub fn family_id(&self, name: &str) -> Result<FamilyId> {
        self.families
            .iter()
            .position(|f| f.name == name)
            .map(|i| FamilyId(i as u32))
            .ok_or_else(|| Error::UnknownFamily(name.to_string()))
    }

    pub fn family(&self, id: FamilyId) -> &Family {
        &self.families[id.0 as usize]
    }

    pub fn symbol(&self, name: &str, index: i64) -> Result<SymbolId> {
        let family = self.family_id(name)?;
        if let FamilyKind::Cycle { length } = self.family(family).kind {
            if index < 0 || index >= i64::from(length) {
                return Err(Error::CycleIndexOutOfRange {
                    family: name.to_string(),
                    index,
                    length,
                });
            }
        }
        Ok(SymbolId { family, index })
    }

    /// `λ`-style shorthand: the one-letter word `name[index]`.
    pub fn generator(&self, name: &str, index: i64) -> Result<ReducedWord> {
        Ok(ReducedWord::letter(self.symbol(name, index)?, 1))
    }

    pub fn is_shift(&self, sym: SymbolId) -> bool {
        matches!(self.family(sym.family).kind, FamilyKind::Shift)
    }

    /// `T^n` on a single symbol.
    pub fn shift_symbol(&self, sym: SymbolId, n: i64) -> SymbolId {
        let index = match self.family(sym.family).kind {
            FamilyKind::Shift => sym.index + n,
            FamilyKind::Cycle { length } => (sym.index + n).rem_euclid(i64::from(length)),
        };
        SymbolId { family: sym.family, index }
    }

    /// `T^n u`, applied letterwise.
    pub fn apply_t(&self, u: &ReducedWord, n: i64) -> ReducedWord {
        if n == 0 {
            return u.clone();
        }
        u.map_symbols(|s| self.shift_symbol(s, n))
    }

    /// Classifies the `T`-orbit of `u`. Words containing a shift symbol
    /// have infinite orbits; otherwise the minimal period divides the lcm of
    /// the cycle lengths that occur.
    pub fn orbit_class(&self, u: &ReducedWord) -> OrbitClass {
        let mut lcm = 1u64;
        for sym in u.symbols() {
            match self.family(sym.family).kind {
                FamilyKind::Shift => return OrbitClass::Infinite,
                FamilyKind::Cycle { length } => {
                    let m = u64::from(length);
                    lcm = lcm / gcd(lcm, m) * m;
                }
            }
        }
        let mut d = 1;
        while d < lcm {
            if lcm.is_multiple_of(d) && self.apply_t(u, d as i64) == *u {
                return OrbitClass::Finite(d);
            }
            d += 1;
        }
        OrbitClass::Finite(lcm)
    }

    pub fn in_finite_orbit_subgroup(&self, u: &ReducedWord) -> bool {
        u.symbols().all(|s| !self.is_shift(s))
    }

    /// Parses whitespace-separated tokens `family[index]^exp` (the exponent
    /// defaults to 1). The empty string and `1` denote the identity.
    pub fn parse_word(&self, text: &str) -> Result<ReducedWord> {
        let text = text.trim();
        if text == "1" {
            return Ok(ReducedWord::identity());
        }
        let mut word = ReducedWord::identity();
        for token in text.split_whitespace() {
            let (symbol, exp) = self.parse_token(token)?;
            word.push_run(Run { symbol, exp });
        }
        Ok(word)
    }

    fn parse_token(&self, token: &str) -> Result<(SymbolId, i64)> {
        let malformed = || Error::MalformedToken(token.to_string());
        let open = token.find('[').ok_or_else(malformed)?;
        let close = token.find(']').ok_or_else(malformed)?;
        if close < open {
            return Err(malformed());
        }
        let name = &token[..open];
        if !is_identifier(name) {
            return Err(malformed());
        }
        let index: i64 = token[open + 1..close].parse().map_err(|_| malformed())?;
        let tail = &token[close + 1..];
        let exp = if tail.is_empty() {
            1
        } else {
            let e = tail.strip_prefix('^').ok_or_else(malformed)?;
            e.parse::<i64>().map_err(|_| malformed())?
        };
        if exp == 0 {
            return Err(Error::ZeroExponent(token.to_string()));
        }
        Ok((self.symbol(name, index)?, exp))
    }

    /// Formats a word in the token syntax accepted by [`Alphabet::parse_word`].
    pub fn format_word(&self, u: &ReducedWord) -> String {
        DisplayWord { alphabet: self, word: u }.to_string()
    }

    pub fn display<'a>(&'a self, u: &'a ReducedWord) -> DisplayWord<'a> {
        DisplayWord { alphabet: self, word: u }
    }
}

pub struct DisplayWord<'a> {
    alphabet: &'a Alphabet,
    word: &'a ReducedWord,
}

impl fmt::Display for DisplayWord<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_identity() {
            return write!(f, "1");
        }
        for (i, run) in self.word.runs.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let name = &self.alphabet.family(run.symbol.family).name;
            write!(f, "{}[{}]", name, run.symbol.index)?;
            if run.exp != 1 {
                write!(f, "^{}", run.exp)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alphabet() -> Alphabet {
        Alphabet::from_pairs(&[
            ("a", FamilyKind::Shift),
            ("b", FamilyKind::Shift),
            ("c", FamilyKind::Cycle { length: 3 }),
            ("s", FamilyKind::Shift),
            ("d", FamilyKind::Cycle { length: 2 }),
        ])
        .unwrap()
    }

    #[test]
    fn parse_reduces() {
        let al = alphabet();
        assert!(al.parse_word("a[0] a[0]^-1").unwrap().is_identity());
        let w = al.parse_word("a[0]^2 b[0]").unwrap();
        let a0 = al.symbol("a", 0).unwrap();
        let b0 = al.symbol("b", 0).unwrap();
        assert_eq!(w.runs(), &[Run { symbol: a0, exp: 2 }, Run { symbol: b0, exp: 1 }]);
        let w = al.parse_word("a[0] b[0] b[0]^-1 a[0]").unwrap();
        assert_eq!(w.runs(), &[Run { symbol: a0, exp: 2 }]);
    }

    #[test]
    fn parse_errors() {
        let al = alphabet();
        assert_eq!(al.parse_word("z[0]"), Err(Error::UnknownFamily("z".into())));
        assert!(matches!(al.parse_word("c[3]"), Err(Error::CycleIndexOutOfRange { .. })));
        assert!(matches!(al.parse_word("c[-1]"), Err(Error::CycleIndexOutOfRange { .. })));
        assert!(matches!(al.parse_word("a0"), Err(Error::MalformedToken(_))));
        assert!(matches!(al.parse_word("a[x]"), Err(Error::MalformedToken(_))));
        assert!(matches!(al.parse_word("a[0]2"), Err(Error::MalformedToken(_))));
        assert!(matches!(al.parse_word("a[0]^"), Err(Error::MalformedToken(_))));
        assert!(matches!(al.parse_word("a[0]^0"), Err(Error::ZeroExponent(_))));
        assert!(al.parse_word("").unwrap().is_identity());
        assert!(al.parse_word("1").unwrap().is_identity());
        assert_eq!(al.parse_word("s[-4]^-3").unwrap().len(), 3);
    }

    #[test]
    fn format_round_trips() {
        let al = alphabet();
        for text in ["1", "a[0]^2 b[0]", "s[-4]^-3 c[2] a[7]"] {
            let w = al.parse_word(text).unwrap();
            assert_eq!(al.format_word(&w), text);
        }
    }

    #[test]
    fn concat_and_inverse() {
        let al = alphabet();
        let u = al.parse_word("a[0] b[0]").unwrap();
        let v = al.parse_word("b[0]^-1 c[0]").unwrap();
        assert_eq!(u.concat(&v), al.parse_word("a[0] c[0]").unwrap());
        let w = al.parse_word("a[0]^2 b[0]").unwrap();
        assert_eq!(w.inverse(), al.parse_word("b[0]^-1 a[0]^-2").unwrap());
        assert!(w.concat(&w.inverse()).is_identity());
        assert!(ReducedWord::identity().inverse().is_identity());
        // cascading cancellation across the junction
        let x = al.parse_word("a[1] b[2] c[0]^2").unwrap();
        let y = al.parse_word("c[0]^-2 b[2]^-1 a[1]^-1 s[0]").unwrap();
        assert_eq!(x.concat(&y), al.parse_word("s[0]").unwrap());
        let z = al.parse_word("c[0]^-1 b[2]").unwrap();
        assert_eq!(x.concat(&z), al.parse_word("a[1] b[2] c[0] b[2]").unwrap());
    }

    #[test]
    fn shift_by_t() {
        let al = alphabet();
        let u = al.parse_word("s[0] c[1]").unwrap();
        assert_eq!(al.apply_t(&u, 2), al.parse_word("s[2] c[0]").unwrap());
        assert_eq!(al.apply_t(&u, -2), al.parse_word("s[-2] c[2]").unwrap());
        assert!(al.apply_t(&ReducedWord::identity(), 5).is_identity());
    }

    #[test]
    fn orbit_classes() {
        let al = alphabet();
        let w = |t: &str| al.parse_word(t).unwrap();
        assert_eq!(al.orbit_class(&w("c[0]")), OrbitClass::Finite(3));
        assert_eq!(al.orbit_class(&w("s[0]")), OrbitClass::Infinite);
        assert_eq!(al.orbit_class(&w("c[0] c[1]^-1")), OrbitClass::Finite(3));
        assert_eq!(al.orbit_class(&w("1")), OrbitClass::Finite(1));
        assert_eq!(al.orbit_class(&w("c[0] d[1]")), OrbitClass::Finite(6));
        assert_eq!(al.orbit_class(&w("c[0] d[1] a[0]")), OrbitClass::Infinite);
    }

    #[test]
    fn alphabet_validation() {
        assert!(Alphabet::from_pairs(&[("a", FamilyKind::Cycle { length: 0 })]).is_err());
        assert!(Alphabet::from_pairs(&[("a", FamilyKind::Shift), ("a", FamilyKind::Shift)]).is_err());
        assert!(Alphabet::from_pairs(&[("1x", FamilyKind::Shift)]).is_err());
        let json = r#"{"families":[{"name":"s","kind":"shift"},{"name":"c","kind":"cycle","length":3}]}"#;
        let al: Alphabet = serde_json::from_str(json).unwrap();
        assert_eq!(al.families().len(), 2);
        let bad = r#"{"families":[{"name":"c","kind":"cycle","length":0}]}"#;
        assert!(serde_json::from_str::<Alphabet>(bad).is_err());
    }
}
