//! Column layouts of the event log and the destinations table.

use chrono::{NaiveDate, NaiveDateTime};

use super::dataset::{ColumnSpec, ColumnType};

pub const DATE_TIME: &str = "date_time";
pub const SRCH_CI: &str = "srch_ci";
pub const SRCH_CO: &str = "srch_co";
pub const IS_BOOKING: &str = "is_booking";
pub const USER_ID: &str = "user_id";
pub const CNT: &str = "cnt";
pub const HOTEL_CLUSTER: &str = "hotel_cluster";
pub const ORIG_DESTINATION_DISTANCE: &str = "orig_destination_distance";
pub const SRCH_DESTINATION_ID: &str = "srch_destination_id";

/// Number of latent `d*` columns in the destinations table.
pub const LATENT_COUNT: usize = 149;

/// Name of the `i`-th latent destination column, 1-based (`d1` .. `d149`).
pub fn latent_name(i: usize) -> String {
    format!("d{i}")
}

/// Whether `name` looks like a destination latent (`d` followed by digits).
pub fn is_latent_name(name: &str) -> bool {
    name.len() > 1 && name.starts_with('d') && name[1..].bytes().all(|b| b.is_ascii_digit())
}

/// Value constraint checked on every loaded cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRule {
    Any,
    /// 0 or 1.
    Flag,
    NonNegative,
    /// Inclusive range.
    Range(i64, i64),
}

impl CellRule {
    /// `None` when `v` satisfies the rule, otherwise a description of the violation.
    pub fn check(self, name: &str, v: i64) -> Option<String> {
        match self {
            CellRule::Any => None,
            CellRule::Flag if v == 0 || v == 1 => None,
            CellRule::Flag => Some(format!("value {v} violates {name} ∈ {{0,1}}")),
            CellRule::NonNegative if v >= 0 => None,
            CellRule::NonNegative => Some(format!("value {v} violates {name} ≥ 0")),
            CellRule::Range(lo, hi) if (lo..=hi).contains(&v) => None,
            CellRule::Range(lo, hi) => Some(format!("value {v} violates {name} ∈ [{lo},{hi}]")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventField {
    pub spec: ColumnSpec,
    /// Whether the header must contain this column. Only the label is optional,
    /// since unlabeled logs omit it.
    pub required: bool,
    pub rule: CellRule,
}

/// The 24-column layout of the train/test event logs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EventSchema {
    pub fields: Vec<EventField>,
}

impl Default for EventSchema {
    fn default() -> Self {
        use CellRule::*;
        use ColumnType::*;
        let f = |name: &str, ty, nullable, rule| EventField {
            spec: ColumnSpec::new(name, ty, nullable),
            required: name != HOTEL_CLUSTER,
            rule,
        };
        EventSchema {
            fields: vec![
                f(DATE_TIME, Timestamp, false, Any),
                f("site_name", Categorical, false, Any),
                f("posa_continent", Categorical, false, Any),
                f("user_location_country", Categorical, false, Any),
                f("user_location_region", Categorical, false, Any),
                f("user_location_city", Categorical, false, Any),
                f(ORIG_DESTINATION_DISTANCE, Real, true, Any),
                f(USER_ID, Categorical, false, Any),
                f("is_mobile", Categorical, false, Flag),
                f("is_package", Categorical, false, Flag),
                f("channel", Categorical, false, Any),
                f(SRCH_CI, Timestamp, false, Any),
                f(SRCH_CO, Timestamp, false, Any),
                f("srch_adults_cnt", Integer, false, NonNegative),
                f("srch_children_cnt", Integer, false, NonNegative),
                f("srch_rm_cnt", Integer, false, NonNegative),
                f(SRCH_DESTINATION_ID, Categorical, false, Any),
                f("srch_destination_type_id", Categorical, false, Any),
                f("hotel_continent", Categorical, false, Any),
                f("hotel_country", Categorical, false, Any),
                f("hotel_market", Categorical, false, Any),
                f(IS_BOOKING, Categorical, false, Flag),
                f(CNT, Integer, false, NonNegative),
                f(HOTEL_CLUSTER, Integer, false, Range(0, 99)),
            ],
        }
    }
}

impl EventSchema {
    pub fn field(&self, name: &str) -> Option<&EventField> {
        self.fields.iter().find(|f| f.spec.name == name)
    }

    pub fn specs(&self) -> Vec<ColumnSpec> {
        self.fields.iter().map(|f| f.spec.clone()).collect()
    }
}

/// Key plus `d1..d149`.
pub fn destination_specs() -> Vec<ColumnSpec> {
    std::iter::once(ColumnSpec::new(
        SRCH_DESTINATION_ID,
        ColumnType::Categorical,
        false,
    ))
    .chain((1..=LATENT_COUNT).map(|i| ColumnSpec::new(latent_name(i), ColumnType::Real, false)))
    .collect()
}

/// Parse the timestamp formats found in the logs: `YYYY-MM-DD HH:MM:SS`,
/// `YYYY-MM-DD`, and month-first `MM-DD-YYYY` as a fallback.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(t) = NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Some(t);
    }
    for fmt in ["%Y-%m-%d", "%m-%d-%Y"] {
        if let Ok(d) = NaiveDate::parse_from_str(s, fmt) {
            return d.and_hms_opt(0, 0, 0);
        }
    }
    None
}

pub fn format_timestamp(t: &NaiveDateTime) -> String {
    t.format("%Y-%m-%d %H:%M:%S").to_string()
}
