//! Counterfactual tables: the potential outcomes `(X1, X2, Y1, Y2)` of one
//! trial under every local setting.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::outcome::{DomainError, Outcome, Setting, SettingPair};

/// Outcomes that would be seen under each local setting.
///
/// Left outcomes depend only on the left setting and right outcomes only on
/// the right setting, so eight potential outcomes `X_ij, Y_ij` collapse to
/// these four.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CounterfactualTable {
    pub x1: Outcome,
    pub x2: Outcome,
    pub y1: Outcome,
    pub y2: Outcome,
}

impl CounterfactualTable {
    pub const fn new(x1: Outcome, x2: Outcome, y1: Outcome, y2: Outcome) -> Self {
        Self { x1, x2, y1, y2 }
    }

    /// Builds a table from signed integers `[x1, x2, y1, y2]`.
    pub fn from_values(values: [i64; 4]) -> Result<Self, DomainError> {
        Ok(Self::new(
            Outcome::new(values[0])?,
            Outcome::new(values[1])?,
            Outcome::new(values[2])?,
            Outcome::new(values[3])?,
        ))
    }

    pub fn values(&self) -> [i8; 4] {
        [self.x1.value(), self.x2.value(), self.y1.value(), self.y2.value()]
    }

    /// Outcome left would produce under setting `a`.
    pub fn left(&self, a: Setting) -> Outcome {
        match a {
            Setting::One => self.x1,
            Setting::Two => self.x2,
        }
    }

    /// Outcome right would produce under setting `b`.
    pub fn right(&self, b: Setting) -> Outcome {
        match b {
            Setting::One => self.y1,
            Setting::Two => self.y2,
        }
    }

    /// Dense index in `0..16`; bit 3 is `x1`, bit 0 is `y2`, set bit means -1.
    pub fn index(&self) -> usize {
        self.values()
            .iter()
            .fold(0, |acc, &v| (acc << 1) | usize::from(v < 0))
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < 16, "table index out of range: {index}");
        let bit = |shift: usize| {
            if index >> shift & 1 == 1 {
                Outcome::Minus
            } else {
                Outcome::Plus
            }
        };
        Self::new(bit(3), bit(2), bit(1), bit(0))
    }

    /// All 16 deterministic tables in index order.
    pub fn all() -> impl Iterator<Item = CounterfactualTable> {
        (0..16).map(Self::from_index)
    }

    /// Outcomes of both wings with every potential outcome negated.
    pub fn negated(&self) -> Self {
        Self::new(self.x1.negated(), self.x2.negated(), self.y1.negated(), self.y2.negated())
    }

    /// Whether `X_a = Y_b` in this table.
    pub fn agrees(&self, pair: SettingPair) -> bool {
        self.left(pair.a) == self.right(pair.b)
    }
}

impl fmt::Display for CounterfactualTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.x1, self.x2, self.y1, self.y2)
    }
}

impl Serialize for CounterfactualTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.values().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CounterfactualTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = <[i64; 4]>::deserialize(deserializer)?;
        CounterfactualTable::from_values(raw).map_err(serde::de::Error::custom)
    }
}

/// The four sides of the square `X1 - Y1 - X2 - Y2 - X1`.
const SQUARE: [SettingPair; 4] = [
    SettingPair::new(Setting::One, Setting::One),
    SettingPair::new(Setting::Two, Setting::One),
    SettingPair::new(Setting::Two, Setting::Two),
    SettingPair::new(Setting::One, Setting::Two),
];

/// Number of sides `(i, j)` of the square with `X_i = Y_j`; always 0, 2 or 4.
pub fn equality_count(table: &CounterfactualTable) -> u32 {
    SQUARE.iter().filter(|&&pair| table.agrees(pair)).count() as u32
}

/// `1{X1=Y2} - 1{X1=Y1} - 1{X2=Y1} - 1{X2=Y2}`; always 0 or -2.
pub fn delta(table: &CounterfactualTable) -> i32 {
    SettingPair::ALL
        .iter()
        .map(|&pair| i32::from(pair.bell_sign()) * i32::from(table.agrees(pair)))
        .sum()
}

/// Observed outcomes `(X_a, Y_b)`. The left value never reads `b` and the
/// right value never reads `a`.
pub fn select_outcomes(table: &CounterfactualTable, a: Setting, b: Setting) -> (Outcome, Outcome) {
    (table.left(a), table.right(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(values: [i64; 4]) -> CounterfactualTable {
        CounterfactualTable::from_values(values).unwrap()
    }

    #[test]
    fn equality_count_examples() {
        assert_eq!(equality_count(&t([1, 1, 1, 1])), 4);
        assert_eq!(equality_count(&t([1, -1, 1, -1])), 2);
        assert_eq!(equality_count(&t([1, 1, -1, -1])), 0);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(&t([1, 1, 1, 1])), -2);
        assert_eq!(delta(&t([1, 1, -1, 1])), 0);
    }

    #[test]
    fn select_outcomes_examples() {
        let table = t([1, -1, 1, -1]);
        let (x, y) = select_outcomes(&table, Setting::One, Setting::Two);
        assert_eq!((x.value(), y.value()), (1, -1));
        let (x, y) = select_outcomes(&table, Setting::Two, Setting::One);
        assert_eq!((x.value(), y.value()), (-1, 1));
    }

    #[test]
    fn left_outcome_ignores_remote_setting() {
        for table in CounterfactualTable::all() {
            for a in Setting::ALL {
                let (x1, _) = select_outcomes(&table, a, Setting::One);
                let (x2, _) = select_outcomes(&table, a, Setting::Two);
                assert_eq!(x1, x2);
                let (_, y1) = select_outcomes(&table, Setting::One, a);
                let (_, y2) = select_outcomes(&table, Setting::Two, a);
                assert_eq!(y1, y2);
            }
        }
    }

    #[test]
    fn index_round_trips() {
        for i in 0..16 {
            assert_eq!(CounterfactualTable::from_index(i).index(), i);
        }
        assert_eq!(t([1, 1, 1, 1]).index(), 0);
        assert_eq!(t([-1, -1, -1, -1]).index(), 15);
    }

    #[test]
    fn rejects_invalid_values() {
        assert!(CounterfactualTable::from_values([1, 0, 1, 1]).is_err());
        assert!(serde_json::from_str::<CounterfactualTable>("[1,1,2,1]").is_err());
        assert!(serde_json::from_str::<CounterfactualTable>("[1,1,1]").is_err());
        let parsed: CounterfactualTable = serde_json::from_str("[1,-1,-1,1]").unwrap();
        assert_eq!(parsed, t([1, -1, -1, 1]));
    }

    #[test]
    fn negation_preserves_equalities() {
        for table in CounterfactualTable::all() {
            assert_eq!(equality_count(&table), equality_count(&table.negated()));
            assert_eq!(delta(&table), delta(&table.negated()));
        }
    }
}
