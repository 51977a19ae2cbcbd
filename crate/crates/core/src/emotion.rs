//! Emotion labels and the table of secondary emotions formed by pairs of
//! primaries.

use core::fmt;
use core::str::FromStr;

use crate::error::Error;

/// One of the four primary emotions. The discriminator, the class statistics
/// and every 4x4 report use this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Emotion {
    Joy,
    Sadness,
    Anger,
    Surprise,
}

impl Emotion {
    pub const ALL: [Emotion; 4] = [Emotion::Joy, Emotion::Sadness, Emotion::Anger, Emotion::Surprise];
    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Emotion> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
            Emotion::Anger => "anger",
            Emotion::Surprise => "surprise",
        }
    }
}

impl fmt::Display for Emotion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Emotion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "joy" => Ok(Emotion::Joy),
            "sadness" => Ok(Emotion::Sadness),
            "anger" => Ok(Emotion::Anger),
            "surprise" => Ok(Emotion::Surprise),
            _ => Err(Error::UnknownEmotion(s.into())),
        }
    }
}

/// Label carried by a clip: a primary emotion or neutral. Neutral clips take
/// part in the auxiliary loss only and never in emotion statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmotionLabel {
    Primary(Emotion),
    Neutral,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; 5] = [
        EmotionLabel::Primary(Emotion::Joy),
        EmotionLabel::Primary(Emotion::Sadness),
        EmotionLabel::Primary(Emotion::Anger),
        EmotionLabel::Primary(Emotion::Surprise),
        EmotionLabel::Neutral,
    ];

    pub fn primary(self) -> Option<Emotion> {
        match self {
            EmotionLabel::Primary(e) => Some(e),
            EmotionLabel::Neutral => None,
        }
    }

    /// Stable code used by the binary file formats: 0..=3 primaries, 4 neutral.
    pub fn code(self) -> u8 {
        match self {
            EmotionLabel::Primary(e) => e.index() as u8,
            EmotionLabel::Neutral => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<EmotionLabel> {
        match code {
            4 => Some(EmotionLabel::Neutral),
            c => Emotion::from_index(c as usize).map(EmotionLabel::Primary),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EmotionLabel::Primary(e) => e.name(),
            EmotionLabel::Neutral => "neutral",
        }
    }
}

impl From<Emotion> for EmotionLabel {
    fn from(e: Emotion) -> Self {
        EmotionLabel::Primary(e)
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().eq_ignore_ascii_case("neutral") {
            Ok(EmotionLabel::Neutral)
        } else {
            s.parse().map(EmotionLabel::Primary)
        }
    }
}

/// A named secondary emotion and the primary pair it is mixed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SecondaryEmotion {
    pub name: &'static str,
    pub pair: (Emotion, Emotion),
}

pub const SECONDARY_EMOTIONS: [SecondaryEmotion; 6] = [
    SecondaryEmotion { name: "bittersweetness", pair: (Emotion::Joy, Emotion::Sadness) },
    SecondaryEmotion { name: "delight", pair: (Emotion::Joy, Emotion::Surprise) },
    SecondaryEmotion { name: "pride", pair: (Emotion::Joy, Emotion::Anger) },
    SecondaryEmotion { name: "disappointment", pair: (Emotion::Sadness, Emotion::Surprise) },
    SecondaryEmotion { name: "envy", pair: (Emotion::Anger, Emotion::Sadness) },
    SecondaryEmotion { name: "outrage", pair: (Emotion::Anger, Emotion::Surprise) },
];

/// Looks up the secondary emotion for an unordered pair of primaries.
pub fn secondary_name(a: Emotion, b: Emotion) -> Option<&'static str> {
    SECONDARY_EMOTIONS
        .iter()
        .find(|s| s.pair == (a, b) || s.pair == (b, a))
        .map(|s| s.name)
}

/// Looks up a secondary emotion by name.
pub fn secondary_by_name(name: &str) -> Option<SecondaryEmotion> {
    SECONDARY_EMOTIONS
        .iter()
        .find(|s| s.name.eq_ignore_ascii_case(name.trim()))
        .copied()
}
