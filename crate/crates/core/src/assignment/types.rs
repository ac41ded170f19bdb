use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JawKind {
    AdultUpper,
    AdultLower,
    DeciduousUpper,
    DeciduousLower,
}

impl JawKind {
    pub const ALL: [JawKind; 4] = [
        JawKind::AdultUpper,
        JawKind::AdultLower,
        JawKind::DeciduousUpper,
        JawKind::DeciduousLower,
    ];

    pub fn is_upper(self) -> bool {
        matches!(self, JawKind::AdultUpper | JawKind::DeciduousUpper)
    }

    pub fn is_adult(self) -> bool {
        matches!(self, JawKind::AdultUpper | JawKind::AdultLower)
    }

    pub fn name(self) -> &'static str {
        match self {
            JawKind::AdultUpper => "adult-upper",
            JawKind::AdultLower => "adult-lower",
            JawKind::DeciduousUpper => "deciduous-upper",
            JawKind::DeciduousLower => "deciduous-lower",
        }
    }

    /// Tooth identifiers from the midline outwards.
    pub fn teeth(self) -> &'static [char] {
        if self.is_adult() {
            &['1', '2', '3', '4', '5', '6', '7', '8']
        } else {
            &['A', 'B', 'C', 'D', 'E']
        }
    }

    /// Teeth that may show up as two half blobs.
    pub fn split_molars(self) -> &'static [char] {
        if self.is_adult() {
            &['6', '7', '8']
        } else {
            &['E']
        }
    }
}

impl fmt::Display for JawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JawKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        JawKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown jaw kind `{s}` (expected adult-upper, adult-lower, deciduous-upper or deciduous-lower)"))
    }
}

/// Patient side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MolarRole {
    None,
    Whole,
    MesialHalf,
    DistalHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToothClass {
    Incisor,
    Canine,
    Premolar,
    Molar,
}

pub fn tooth_class(tooth: char) -> ToothClass {
    match tooth {
        '1' | '2' | 'A' | 'B' => ToothClass::Incisor,
        '3' | 'C' => ToothClass::Canine,
        '4' | '5' => ToothClass::Premolar,
        _ => ToothClass::Molar,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ToothType {
    /// Palmer code such as `UR6`, `LL6.0` or `URE.1`.
    pub code: String,
    pub jaw: JawKind,
    pub side: Side,
    pub tooth: char,
    /// 1 for central incisors, counting outwards.
    pub ordinal: u8,
    pub role: MolarRole,
}

impl ToothType {
    pub fn new(jaw: JawKind, side: Side, tooth: char, role: MolarRole) -> ToothType {
        let prefix = match (jaw.is_upper(), side) {
            (true, Side::Right) => "UR",
            (true, Side::Left) => "UL",
            (false, Side::Right) => "LR",
            (false, Side::Left) => "LL",
        };
        let suffix = match role {
            MolarRole::MesialHalf => ".0",
            MolarRole::DistalHalf => ".1",
            _ => "",
        };
        let ordinal = jaw.teeth().iter().position(|&t| t == tooth).expect("tooth belongs to jaw") as u8 + 1;
        ToothType {
            code: format!("{prefix}{tooth}{suffix}"),
            jaw,
            side,
            tooth,
            ordinal,
            role,
        }
    }

    pub fn class(&self) -> ToothClass {
        tooth_class(self.tooth)
    }

    pub fn is_half(&self) -> bool {
        matches!(self.role, MolarRole::MesialHalf | MolarRole::DistalHalf)
    }

    /// Code of the same type on the patient's right, which is the key used
    /// for pooled reference data.
    pub fn pooled_code(&self) -> String {
        ToothType { side: Side::Right, ..self.clone() }.recode()
    }

    /// Code of the whole tooth this type belongs to.
    pub fn whole_code(&self) -> String {
        let role = if self.is_half() { MolarRole::Whole } else { self.role };
        ToothType { role, ..self.clone() }.recode()
    }

    fn recode(&self) -> String {
        ToothType::new(self.jaw, self.side, self.tooth, self.role).code
    }

    /// Whether assigning both would double count one molar.
    pub fn conflicts_with(&self, other: &ToothType) -> bool {
        self.side == other.side
            && self.tooth == other.tooth
            && self.role != other.role
            && (self.role == MolarRole::Whole || other.role == MolarRole::Whole)
    }
}

/// All searched types for `jaw`, ordered by increasing frame x (the model's
/// left to right when viewed from above with the front at the top).
///
/// Molar groups list the distal half outermost, so the halves sit in arch
/// order; the whole type sits on the mesial side of its halves.
pub fn tooth_types(jaw: JawKind) -> Vec<ToothType> {
    let (first, second) = if jaw.is_upper() {
        (Side::Right, Side::Left)
    } else {
        (Side::Left, Side::Right)
    };
    let teeth = jaw.teeth();
    let split = jaw.split_molars();
    let group = |side: Side, tooth: char| -> Vec<ToothType> {
        if split.contains(&tooth) {
            vec![
                ToothType::new(jaw, side, tooth, MolarRole::DistalHalf),
                ToothType::new(jaw, side, tooth, MolarRole::MesialHalf),
                ToothType::new(jaw, side, tooth, MolarRole::Whole),
            ]
        } else {
            vec![ToothType::new(jaw, side, tooth, MolarRole::None)]
        }
    };
    let mut out = Vec::new();
    for &t in teeth.iter().rev() {
        out.extend(group(first, t));
    }
    for &t in teeth {
        let mut g = group(second, t);
        g.reverse();
        out.extend(g);
    }
    out
}

/// Whole-tooth codes for `jaw` (no halves), in the same order.
pub fn whole_tooth_codes(jaw: JawKind) -> Vec<String> {
    tooth_types(jaw).into_iter().filter(|t| !t.is_half()).map(|t| t.code).collect()
}
