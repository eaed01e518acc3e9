//! Sargam note alphabet, octave encoding and semitone arithmetic.
//!
//! Notes are written as a single letter optionally followed by an octave
//! suffix: `,` for the lower octave, `'` for the upper octave, nothing for
//! the middle octave. Uppercase letters are the natural (sudh) degrees;
//! lowercase `r g d n` are the flattened (komal) degrees and lowercase `m`
//! is the sharpened (tivra) Ma.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NotationError {
    #[error("unknown note letter {0:?}")]
    UnknownLetter(String),
    #[error("malformed octave suffix in {0:?}")]
    MalformedSuffix(String),
    #[error("semitone offset {0} lies outside the three supported octaves")]
    OutOfRange(i32),
}

/// One of the twelve scale degrees, ordered by pitch class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    /// Sa, the tonic.
    S,
    /// Komal Re.
    KomalRe,
    /// Sudh Re.
    R,
    /// Komal Ga.
    KomalGa,
    /// Sudh Ga.
    G,
    /// Sudh Ma.
    M,
    /// Tivra Ma.
    TivraMa,
    /// Pa.
    P,
    /// Komal Dha.
    KomalDha,
    /// Sudh Dha.
    D,
    /// Komal Ni.
    KomalNi,
    /// Sudh Ni.
    N,
}

impl Letter {
    pub const ALL: [Letter; 12] = [
        Letter::S,
        Letter::KomalRe,
        Letter::R,
        Letter::KomalGa,
        Letter::G,
        Letter::M,
        Letter::TivraMa,
        Letter::P,
        Letter::KomalDha,
        Letter::D,
        Letter::KomalNi,
        Letter::N,
    ];

    /// Pitch class in semitones above Sa (0..=11).
    pub fn class(self) -> i32 {
        self as i32
    }

    pub fn from_class(class: i32) -> Letter {
        Letter::ALL[class.rem_euclid(12) as usize]
    }

    pub fn symbol(self) -> char {
        match self {
            Letter::S => 'S',
            Letter::KomalRe => 'r',
            Letter::R => 'R',
            Letter::KomalGa => 'g',
            Letter::G => 'G',
            Letter::M => 'M',
            Letter::TivraMa => 'm',
            Letter::P => 'P',
            Letter::KomalDha => 'd',
            Letter::D => 'D',
            Letter::KomalNi => 'n',
            Letter::N => 'N',
        }
    }

    pub fn from_symbol(c: char) -> Option<Letter> {
        Letter::ALL.into_iter().find(|l| l.symbol() == c)
    }

    /// Conventional name, e.g. "Sudh Ga" or "Komal Ni".
    pub fn name(self) -> &'static str {
        match self {
            Letter::S => "Sa",
            Letter::KomalRe => "Komal Re",
            Letter::R => "Sudh Re",
            Letter::KomalGa => "Komal Ga",
            Letter::G => "Sudh Ga",
            Letter::M => "Sudh Ma",
            Letter::TivraMa => "Tivra Ma",
            Letter::P => "Pa",
            Letter::KomalDha => "Komal Dha",
            Letter::D => "Sudh Dha",
            Letter::KomalNi => "Komal Ni",
            Letter::N => "Sudh Ni",
        }
    }

    /// Upward distance in semitones from `self` to `other`, modulo the octave.
    pub fn interval_to(self, other: Letter) -> i32 {
        (other.class() - self.class()).rem_euclid(12)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.symbol().encode_utf8(&mut [0; 4]))
    }
}

impl FromStr for Letter {
    type Err = NotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => {
                Letter::from_symbol(c).ok_or_else(|| NotationError::UnknownLetter(s.to_string()))
            }
            _ => Err(NotationError::UnknownLetter(s.to_string())),
        }
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Octave {
    Lower,
    Middle,
    Upper,
}

impl Octave {
    pub const ALL: [Octave; 3] = [Octave::Lower, Octave::Middle, Octave::Upper];

    pub fn index(self) -> i32 {
        match self {
            Octave::Lower => -1,
            Octave::Middle => 0,
            Octave::Upper => 1,
        }
    }

    pub fn from_index(index: i32) -> Option<Octave> {
        match index {
            -1 => Some(Octave::Lower),
            0 => Some(Octave::Middle),
            1 => Some(Octave::Upper),
            _ => None,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Octave::Lower => ",",
            Octave::Middle => "",
            Octave::Upper => "'",
        }
    }
}

/// Semitones above the middle-octave Sa. Negative below it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SemitoneOffset(pub i32);

impl SemitoneOffset {
    /// Lowest representable offset (lower-octave Sa).
    pub const MIN: SemitoneOffset = SemitoneOffset(-12);
    /// Highest representable offset (upper-octave Sudh Ni).
    pub const MAX: SemitoneOffset = SemitoneOffset(23);

    pub fn value(self) -> i32 {
        self.0
    }

    pub fn to_note(self) -> Result<NoteToken, NotationError> {
        let octave =
            Octave::from_index(self.0.div_euclid(12)).ok_or(NotationError::OutOfRange(self.0))?;
        Ok(NoteToken::new(Letter::from_class(self.0), octave))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NoteToken {
    pub letter: Letter,
    pub octave: Octave,
}

impl NoteToken {
    pub fn new(letter: Letter, octave: Octave) -> Self {
        Self { letter, octave }
    }

    pub fn middle(letter: Letter) -> Self {
        Self::new(letter, Octave::Middle)
    }

    pub fn semitone_offset(&self) -> SemitoneOffset {
        semitone_offset(self)
    }
}

pub fn parse_note(token: &str) -> Result<NoteToken, NotationError> {
    let mut chars = token.chars();
    let first = chars
        .next()
        .ok_or_else(|| NotationError::UnknownLetter(String::new()))?;
    let letter = Letter::from_symbol(first)
        .ok_or_else(|| NotationError::UnknownLetter(token.to_string()))?;
    let octave = match chars.as_str() {
        "" => Octave::Middle,
        "," => Octave::Lower,
        "'" => Octave::Upper,
        _ => return Err(NotationError::MalformedSuffix(token.to_string())),
    };
    Ok(NoteToken::new(letter, octave))
}

pub fn semitone_offset(note: &NoteToken) -> SemitoneOffset {
    SemitoneOffset(note.letter.class() + 12 * note.octave.index())
}

impl fmt::Display for NoteToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&format!("{}{}", self.letter.symbol(), self.octave.suffix()))
    }
}

impl FromStr for NoteToken {
    type Err = NotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_note(s)
    }
}

impl Serialize for NoteToken {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NoteToken {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_note(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_tokens() -> impl Iterator<Item = NoteToken> {
        Letter::ALL
            .into_iter()
            .flat_map(|l| Octave::ALL.into_iter().map(move |o| NoteToken::new(l, o)))
    }

    #[test]
    fn parses_examples() {
        assert_eq!(parse_note("S").unwrap(), NoteToken::middle(Letter::S));
        assert_eq!(parse_note("n").unwrap(), NoteToken::middle(Letter::KomalNi));
        assert_eq!(
            parse_note("G'").unwrap(),
            NoteToken::new(Letter::G, Octave::Upper)
        );
        assert_eq!(
            parse_note("N,").unwrap(),
            NoteToken::new(Letter::N, Octave::Lower)
        );
        assert_eq!(parse_note("m").unwrap().letter, Letter::TivraMa);
    }

    #[test]
    fn rejects_bad_tokens() {
        assert!(matches!(
            parse_note("X"),
            Err(NotationError::UnknownLetter(_))
        ));
        assert!(matches!(
            parse_note(""),
            Err(NotationError::UnknownLetter(_))
        ));
        // no komal Sa or komal Pa
        assert!(matches!(
            parse_note("s"),
            Err(NotationError::UnknownLetter(_))
        ));
        assert!(matches!(
            parse_note("p"),
            Err(NotationError::UnknownLetter(_))
        ));
        assert!(matches!(
            parse_note("G''"),
            Err(NotationError::MalformedSuffix(_))
        ));
        assert!(matches!(
            parse_note("G,'"),
            Err(NotationError::MalformedSuffix(_))
        ));
        assert!(matches!(
            parse_note("Gx"),
            Err(NotationError::MalformedSuffix(_))
        ));
    }

    #[test]
    fn offsets() {
        assert_eq!(semitone_offset(&NoteToken::middle(Letter::S)).value(), 0);
        assert_eq!(semitone_offset(&NoteToken::middle(Letter::N)).value(), 11);
        assert_eq!(
            semitone_offset(&NoteToken::new(Letter::S, Octave::Upper)).value(),
            12
        );
        assert_eq!(
            semitone_offset(&NoteToken::new(Letter::S, Octave::Lower)),
            SemitoneOffset::MIN
        );
        assert_eq!(
            semitone_offset(&NoteToken::new(Letter::N, Octave::Upper)),
            SemitoneOffset::MAX
        );
    }

    #[test]
    fn round_trip_all_tokens() {
        for t in all_tokens() {
            assert_eq!(parse_note(&t.to_string()).unwrap(), t);
            assert_eq!(t.semitone_offset().to_note().unwrap(), t);
        }
    }

    #[test]
    fn offsets_injective_and_increasing_in_octave() {
        let mut seen = std::collections::HashSet::new();
        for t in all_tokens() {
            assert!(seen.insert(t.semitone_offset()));
        }
        for l in Letter::ALL {
            let offs: Vec<_> = Octave::ALL
                .into_iter()
                .map(|o| NoteToken::new(l, o).semitone_offset())
                .collect();
            assert!(offs.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn out_of_range_offset() {
        assert_eq!(
            SemitoneOffset(24).to_note(),
            Err(NotationError::OutOfRange(24))
        );
        assert_eq!(
            SemitoneOffset(-13).to_note(),
            Err(NotationError::OutOfRange(-13))
        );
    }

    #[test]
    fn interval_is_modular() {
        assert_eq!(Letter::G.interval_to(Letter::N), 7);
        assert_eq!(Letter::N.interval_to(Letter::G), 5);
        assert_eq!(Letter::M.interval_to(Letter::S), 7);
    }
}
