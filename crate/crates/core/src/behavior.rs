//! Behaviors: the sixteen conditional probabilities `P(x, y | a, b)`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde_json::{Map, Value};
use thiserror::Error;

use crate::outcome::{Outcome, Setting, SettingPair};
use crate::scalar::{shortest_decimal_rational, Scalar};
use crate::table::CounterfactualTable;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BehaviorError {
    #[error("$.p[\"{key}\"]: probability {value} outside [0, 1]")]
    EntryOutOfRange { key: String, value: String },
    #[error("setting pair {pair}: probabilities sum to {sum}, expected 1")]
    NotNormalized { pair: String, sum: String },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
}

fn cell(x: Outcome, y: Outcome, pair: SettingPair) -> usize {
    4 * pair.index() + 2 * x.index() + y.index()
}

/// Key `"x,y,a,b"` used in the JSON form, e.g. `"+1,-1,1,2"`.
pub fn cell_key(x: Outcome, y: Outcome, pair: SettingPair) -> String {
    format!("{},{},{},{}", x.signed_label(), y.signed_label(), pair.a, pair.b)
}

/// Every `(x, y, pair)` in storage order.
pub fn cells() -> impl Iterator<Item = (Outcome, Outcome, SettingPair)> {
    SettingPair::ALL.into_iter().flat_map(|pair| {
        Outcome::ALL
            .into_iter()
            .flat_map(move |x| Outcome::ALL.into_iter().map(move |y| (x, y, pair)))
    })
}

/// Validated table of conditional probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior<T> {
    probs: [T; 16],
}

impl<T: Scalar> Behavior<T> {
    /// Validates entries against `[0, 1]` and per-pair normalization using the
    /// scalar's default tolerances.
    pub fn new(probs: [T; 16]) -> Result<Self, BehaviorError> {
        Self::with_tolerances(probs, &T::entry_tolerance(), &T::normalization_tolerance())
    }

    pub fn with_tolerances(
        probs: [T; 16],
        entry_tol: &T,
        norm_tol: &T,
    ) -> Result<Self, BehaviorError> {
        let lo = -entry_tol.clone();
        let hi = T::one() + entry_tol.clone();
        for (x, y, pair) in cells() {
            let p = &probs[cell(x, y, pair)];
            if !(*p >= lo && *p <= hi) {
                return Err(BehaviorError::EntryOutOfRange {
                    key: cell_key(x, y, pair),
                    value: p.to_string(),
                });
            }
        }
        for pair in SettingPair::ALL {
            let sum = Outcome::ALL
                .iter()
                .flat_map(|&x| Outcome::ALL.iter().map(move |&y| (x, y)))
                .fold(T::zero(), |acc, (x, y)| acc + probs[cell(x, y, pair)].clone());
            let gap = (sum.clone() - T::one()).abs();
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
            if !(gap <= *norm_tol) {
                return Err(BehaviorError::NotNormalized { pair: pair.label(), sum: sum.to_string() });
            }
        }
        Ok(Self { probs })
    }

    pub fn from_fn<F>(mut f: F) -> Result<Self, BehaviorError>
    where
        F: FnMut(Outcome, Outcome, SettingPair) -> T,
    {
        let probs = std::array::from_fn(|i| {
            let pair = SettingPair::from_index(i / 4);
            let x = Outcome::ALL[(i / 2) % 2];
            let y = Outcome::ALL[i % 2];
            f(x, y, pair)
        });
        Self::new(probs)
    }

    pub fn p(&self, x: Outcome, y: Outcome, pair: SettingPair) -> &T {
        &self.probs[cell(x, y, pair)]
    }

    pub fn probs(&self) -> &[T; 16] {
        &self.probs
    }

    /// `P(X = Y | ab)`.
    pub fn prob_equal(&self, pair: SettingPair) -> T {
        self.p(Outcome::Plus, Outcome::Plus, pair).clone()
            + self.p(Outcome::Minus, Outcome::Minus, pair).clone()
    }

    /// Correlator `E_ab = Σ x·y·p(x, y | a, b)`.
    pub fn correlator(&self, pair: SettingPair) -> T {
        let equal = self.prob_equal(pair);
        let unequal = self.p(Outcome::Plus, Outcome::Minus, pair).clone()
            + self.p(Outcome::Minus, Outcome::Plus, pair).clone();
        equal - unequal
    }

    /// Left marginal `Σ_y p(x, y | a, b)`.
    pub fn left_marginal(&self, x: Outcome, pair: SettingPair) -> T {
        self.p(x, Outcome::Plus, pair).clone() + self.p(x, Outcome::Minus, pair).clone()
    }

    /// Right marginal `Σ_x p(x, y | a, b)`.
    pub fn right_marginal(&self, y: Outcome, pair: SettingPair) -> T {
        self.p(Outcome::Plus, y, pair).clone() + self.p(Outcome::Minus, y, pair).clone()
    }

    /// Largest dependence of either wing's marginal on the remote setting.
    pub fn max_signalling_gap(&self) -> T {
        let mut worst = T::zero();
        for s in Setting::ALL {
            for o in Outcome::ALL {
                let left = (self.left_marginal(o, SettingPair::new(s, Setting::One))
                    - self.left_marginal(o, SettingPair::new(s, Setting::Two)))
                .abs();
                let right = (self.right_marginal(o, SettingPair::new(Setting::One, s))
                    - self.right_marginal(o, SettingPair::new(Setting::Two, s)))
                .abs();
                for gap in [left, right] {
                    if gap > worst {
                        worst = gap;
                    }
                }
            }
        }
        worst
    }

    /// Uniformly random outcomes for every setting pair.
    pub fn uniform() -> Self {
        let quarter = T::one() / T::from_u8(4).expect("4 is representable");
        Self { probs: std::array::from_fn(|_| quarter.clone()) }
    }

    /// Behavior produced by always answering with `table`.
    pub fn deterministic(table: &CounterfactualTable) -> Self {
        Self::mixture_of_tables(|t| if t == *table { T::one() } else { T::zero() })
            .expect("point mass is a valid behavior")
    }

    /// `Σ_t w(t) · behavior(t)` over the 16 deterministic tables.
    pub fn mixture_of_tables<F>(mut weight: F) -> Result<Self, BehaviorError>
    where
        F: FnMut(CounterfactualTable) -> T,
    {
        let mut probs: [T; 16] = std::array::from_fn(|_| T::zero());
        for table in CounterfactualTable::all() {
            let w = weight(table);
            for pair in SettingPair::ALL {
                let i = cell(table.left(pair.a), table.right(pair.b), pair);
                probs[i] = probs[i].clone() + w.clone();
            }
        }
        Self::new(probs)
    }

    /// Popescu–Rohrlich box: outcomes perfectly correlated for every pair
    /// except (2,2), where they are perfectly anticorrelated.
    pub fn pr_box() -> Self {
        Self::correlation_box(|pair| pair != SettingPair::new(Setting::Two, Setting::Two))
    }

    /// PR box aligned with the Bell functional: outcomes equal only at (1,2).
    pub fn bell_aligned_pr_box() -> Self {
        Self::correlation_box(|pair| pair == SettingPair::new(Setting::One, Setting::Two))
    }

    fn correlation_box(correlated: impl Fn(SettingPair) -> bool) -> Self {
        let half = T::one() / T::from_u8(2).expect("2 is representable");
        Self::from_fn(|x, y, pair| {
            let agree = x == y;
            if agree == correlated(pair) {
                half.clone()
            } else {
                T::zero()
            }
        })
        .expect("PR box is a valid behavior")
    }

    /// `visibility · self + (1 - visibility) · other`.
    pub fn mix(&self, other: &Self, visibility: &T) -> Result<Self, BehaviorError> {
        let rest = T::one() - visibility.clone();
        let probs = std::array::from_fn(|i| {
            visibility.clone() * self.probs[i].clone() + rest.clone() * other.probs[i].clone()
        });
        Self::new(probs)
    }

    /// Same behavior with both wings' outcome labels flipped.
    pub fn relabel_outcomes(&self) -> Self {
        let probs = std::array::from_fn(|i| {
            let pair = SettingPair::from_index(i / 4);
            let x = Outcome::ALL[(i / 2) % 2];
            let y = Outcome::ALL[i % 2];
            self.p(x.negated(), y.negated(), pair).clone()
        });
        Self { probs }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Result<Behavior<U>, BehaviorError> {
        Behavior::new(std::array::from_fn(|i| f(&self.probs[i])))
    }
}

/// `P(X=Y|12) - P(X=Y|11) - P(X=Y|21) - P(X=Y|22)`. Non-positive for every
/// local behavior.
pub fn bell_lhs<T: Scalar>(behavior: &Behavior<T>) -> T {
    SettingPair::ALL.iter().fold(T::zero(), |acc, &pair| {
        let term = behavior.prob_equal(pair);
        if pair.bell_sign() > 0 {
            acc + term
        } else {
            acc - term
        }
    })
}

/// Whether each wing's outcome marginals are independent of the remote
/// setting, within `tol`.
pub fn no_signalling_check<T: Scalar>(behavior: &Behavior<T>, tol: &T) -> bool {
    behavior.max_signalling_gap() <= *tol
}

impl Behavior<f64> {
    /// JSON form: `{"p": {"+1,+1,1,1": 0.25, ...}}` with all 16 keys.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (x, y, pair) in cells() {
            map.insert(cell_key(x, y, pair), Value::from(*self.p(x, y, pair)));
        }
        let mut root = Map::new();
        root.insert("p".into(), Value::Object(map));
        Value::Object(root)
    }

    pub fn from_json_str(text: &str) -> Result<Self, BehaviorError> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| BehaviorError::Schema { path: "$".into(), message: e.to_string() })?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self, BehaviorError> {
        Self::new(parse_cells(value)?)
    }

    /// Exact copy whose entries are the shortest decimals of the floats. Returns
    /// `None` unless that copy is exactly normalized.
    pub fn to_exact(&self) -> Option<Behavior<BigRational>> {
        let mut exact = Vec::with_capacity(16);
        for p in &self.probs {
            exact.push(shortest_decimal_rational(*p)?);
        }
        let probs: [BigRational; 16] = exact.try_into().ok()?;
        Behavior::new(probs).ok()
    }
}

fn parse_cells(value: &Value) -> Result<[f64; 16], BehaviorError> {
    let schema = |path: &str, message: String| BehaviorError::Schema { path: path.into(), message };
    let root = value
        .as_object()
        .ok_or_else(|| schema("$", "expected an object".into()))?;
    if let Some(extra) = root.keys().find(|k| k.as_str() != "p") {
        return Err(schema("$", format!("unexpected key \"{extra}\"")));
    }
    let table = root
        .get("p")
        .ok_or_else(|| schema("$", "missing key \"p\"".into()))?
        .as_object()
        .ok_or_else(|| schema("$.p", "expected an object".into()))?;
    let expected: BTreeMap<String, usize> = cells()
        .enumerate()
        .map(|(i, (x, y, pair))| (cell_key(x, y, pair), i))
        .collect();
    if let Some(unknown) = table.keys().find(|k| !expected.contains_key(k.as_str())) {
        return Err(schema("$.p", format!("unknown key \"{unknown}\"")));
    }
    let mut probs = [0.0; 16];
    for (key, &i) in &expected {
        let path = format!("$.p[\"{key}\"]");
        let entry = table
            .get(key)
            .ok_or_else(|| schema("$.p", format!("missing key \"{key}\"")))?;
        probs[i] = entry
            .as_f64()
            .ok_or_else(|| schema(&path, "expected a number".into()))?;
    }
    Ok(probs)
}
