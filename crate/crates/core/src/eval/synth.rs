//! Synthetic event logs and destination tables with a tunable dependence of
//! the features on `hotel_cluster`, plus a separable fixture for ensembles.

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::schema::{self, latent_name, EventSchema, LATENT_COUNT};
use crate::data::{Column, ColumnData, Dataset};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::rng::{self, streams, StreamRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub n_events: usize,
    pub n_hotel_clusters: usize,
    /// 0 makes every feature independent of the label; larger values make
    /// each row follow its cluster's profile more often.
    pub cluster_separation: f64,
    pub booking_rate: f64,
    pub n_destinations: usize,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_events: 10_000,
            n_hotel_clusters: 100,
            cluster_separation: 1.0,
            booking_rate: 0.5,
            n_destinations: 300,
            seed: 0,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if self.n_events == 0 {
            bad.push("n_events must be ≥ 1".to_string());
        }
        if !(1..=100).contains(&self.n_hotel_clusters) {
            bad.push(format!("n_hotel_clusters must lie in [1, 100], got {}", self.n_hotel_clusters));
        }
        if !(self.cluster_separation >= 0.0 && self.cluster_separation.is_finite()) {
            bad.push(format!("cluster_separation must be ≥ 0, got {}", self.cluster_separation));
        }
        if !(self.booking_rate > 0.0 && self.booking_rate <= 1.0) {
            bad.push(format!("booking_rate must lie in (0, 1], got {}", self.booking_rate));
        }
        if self.n_destinations == 0 {
            bad.push("n_destinations must be ≥ 1".to_string());
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::arg(bad.join("; ")))
        }
    }
}

/// Generate `n` events over `n_hotel_clusters` classes and a matching
/// destinations table, using default booking rate and destination count.
pub fn synthesize_dataset(
    n: usize,
    n_hotel_clusters: usize,
    seed: u64,
    cluster_separation: f64,
) -> Result<(Dataset, Dataset)> {
    synthesize(&SynthParams {
        n_events: n,
        n_hotel_clusters,
        cluster_separation,
        seed,
        ..SynthParams::default()
    })
}

/// Categorical field profile: value range and the per-cluster preferred value.
struct Cat {
    name: &'static str,
    range: (i64, i64),
    preferred: Vec<i64>,
}

struct Profile {
    cats: Vec<Cat>,
    distance_mu: Vec<f64>,
    adults: Vec<f64>,
    children: Vec<f64>,
    rooms: Vec<f64>,
    stay: Vec<f64>,
    lead: Vec<f64>,
    package: Vec<f64>,
    mobile: Vec<f64>,
    /// Three favoured destination ids per cluster.
    destinations: Vec<[i64; 3]>,
}

const CATS: [(&str, (i64, i64)); 10] = [
    ("site_name", (1, 53)),
    ("posa_continent", (0, 4)),
    ("user_location_country", (0, 239)),
    ("user_location_region", (0, 1000)),
    ("user_location_city", (0, 5000)),
    ("channel", (0, 10)),
    ("srch_destination_type_id", (1, 9)),
    ("hotel_continent", (0, 6)),
    ("hotel_country", (0, 212)),
    ("hotel_market", (0, 2000)),
];

impl Profile {
    fn draw(clusters: usize, n_destinations: usize, r: &mut StreamRng) -> Profile {
        let per = |r: &mut StreamRng, lo: f64, hi: f64| -> Vec<f64> {
            (0..clusters).map(|_| r.random_range(lo..hi)).collect()
        };
        Profile {
            cats: CATS
                .iter()
                .map(|&(name, range)| Cat {
                    name,
                    range,
                    preferred: (0..clusters).map(|_| r.random_range(range.0..=range.1)).collect(),
                })
                .collect(),
            distance_mu: per(r, 2.0, 8.5),
            adults: per(r, 1.0, 4.0),
            children: per(r, 0.0, 2.5),
            rooms: per(r, 1.0, 2.5),
            stay: per(r, 1.0, 10.0),
            lead: per(r, 0.0, 120.0),
            package: per(r, 0.0, 1.0),
            mobile: per(r, 0.0, 1.0),
            destinations: (0..clusters)
                .map(|_| {
                    let d = n_destinations as i64;
                    [r.random_range(1..=d), r.random_range(1..=d), r.random_range(1..=d)]
                })
                .collect(),
        }
    }
}

pub fn synthesize(p: &SynthParams) -> Result<(Dataset, Dataset)> {
    p.validate()?;
    let n = p.n_events;
    let c_count = p.n_hotel_clusters;
    let follow = p.cluster_separation / (1.0 + p.cluster_separation);
    let profile = Profile::draw(c_count, p.n_destinations, &mut rng::substream(p.seed, streams::SYNTHETIC, 0));
    let mut r = rng::substream(p.seed, streams::SYNTHETIC, 1);
    let noise = Normal::new(0.0, 1.0).expect("unit normal");

    let start = NaiveDate::from_ymd_opt(2013, 1, 1).expect("date").and_hms_opt(0, 0, 0).expect("time");
    let span_secs = (NaiveDate::from_ymd_opt(2016, 1, 1).expect("date").and_hms_opt(0, 0, 0).expect("time")
        - start)
        .num_seconds();
    // Destination ids above the table size are never matched by the merge.
    let max_dest = (p.n_destinations + p.n_destinations.div_ceil(20)) as i64;

    let mut date_time = Vec::with_capacity(n);
    let mut ci = Vec::with_capacity(n);
    let mut co = Vec::with_capacity(n);
    let mut cats: Vec<Vec<Option<i64>>> = vec![Vec::with_capacity(n); CATS.len()];
    let (mut distance, mut user, mut mobile, mut package) = (vec![], vec![], vec![], vec![]);
    let (mut adults, mut children, mut rooms) = (vec![], vec![], vec![]);
    let (mut dest, mut booking, mut cnt, mut label) = (vec![], vec![], vec![], vec![]);

    // Either the row's own cluster profile or a random cluster's.
    let pick = |r: &mut StreamRng, c: usize| -> usize {
        if r.random::<f64>() < follow {
            c
        } else {
            r.random_range(0..c_count)
        }
    };
    let count = |r: &mut StreamRng, mean: f64, min: i64| -> Option<i64> {
        Some(((mean + 0.5 * noise.sample(r)).round() as i64).max(min))
    };

    for _ in 0..n {
        let c = r.random_range(0..c_count);
        let when: NaiveDateTime = start + Duration::seconds(r.random_range(0..span_secs));
        date_time.push(Some(when));
        let lead = profile.lead[pick(&mut r, c)] + 5.0 * noise.sample(&mut r);
        let check_in = when.date() + Duration::days(lead.max(0.0).round() as i64);
        let stay = (profile.stay[pick(&mut r, c)] + noise.sample(&mut r)).round().max(1.0) as i64;
        ci.push(check_in.and_hms_opt(0, 0, 0));
        co.push((check_in + Duration::days(stay)).and_hms_opt(0, 0, 0));

        for (col, cat) in cats.iter_mut().zip(&profile.cats) {
            let v = if r.random::<f64>() < follow {
                cat.preferred[c]
            } else {
                r.random_range(cat.range.0..=cat.range.1)
            };
            col.push(Some(v));
        }
        distance.push(if r.random::<f64>() < 0.3 {
            None
        } else {
            Some((profile.distance_mu[pick(&mut r, c)] + 0.4 * noise.sample(&mut r)).exp())
        });
        user.push(Some(r.random_range(0..(n as i64 / 3).max(1))));
        mobile.push(Some(i64::from(r.random::<f64>() < profile.mobile[pick(&mut r, c)])));
        package.push(Some(i64::from(r.random::<f64>() < profile.package[pick(&mut r, c)])));
        let mean = profile.adults[pick(&mut r, c)];
        adults.push(count(&mut r, mean, 0));
        let mean = profile.children[pick(&mut r, c)];
        children.push(count(&mut r, mean, 0));
        let mean = profile.rooms[pick(&mut r, c)];
        rooms.push(count(&mut r, mean, 1));
        dest.push(Some(if r.random::<f64>() < follow {
            profile.destinations[c][r.random_range(0..3)]
        } else {
            r.random_range(1..=max_dest)
        }));
        let is_booking = r.random::<f64>() < p.booking_rate;
        booking.push(Some(i64::from(is_booking)));
        cnt.push(Some(if is_booking { 1 } else { r.random_range(1..=5) }));
        label.push(Some(c as i64));
    }

    let mut by_name: Vec<(String, ColumnData)> = vec![
        (schema::DATE_TIME.into(), ColumnData::Timestamp(date_time)),
        (schema::ORIG_DESTINATION_DISTANCE.into(), ColumnData::Real(distance)),
        (schema::USER_ID.into(), ColumnData::Categorical(user)),
        ("is_mobile".into(), ColumnData::Categorical(mobile)),
        ("is_package".into(), ColumnData::Categorical(package)),
        (schema::SRCH_CI.into(), ColumnData::Timestamp(ci)),
        (schema::SRCH_CO.into(), ColumnData::Timestamp(co)),
        ("srch_adults_cnt".into(), ColumnData::Integer(adults)),
        ("srch_children_cnt".into(), ColumnData::Integer(children)),
        ("srch_rm_cnt".into(), ColumnData::Integer(rooms)),
        (schema::SRCH_DESTINATION_ID.into(), ColumnData::Categorical(dest)),
        (schema::IS_BOOKING.into(), ColumnData::Categorical(booking)),
        (schema::CNT.into(), ColumnData::Integer(cnt)),
        (schema::HOTEL_CLUSTER.into(), ColumnData::Integer(label)),
    ];
    for (cat, col) in profile.cats.iter().zip(cats) {
        by_name.push((cat.name.into(), ColumnData::Categorical(col)));
    }
    let events = Dataset::new(
        EventSchema::default()
            .fields
            .iter()
            .map(|f| {
                let pos = by_name.iter().position(|(name, _)| *name == f.spec.name).expect("generated");
                let (name, data) = by_name.swap_remove(pos);
                Column::new(name, data)
            })
            .collect(),
    )?;

    let mut dr = rng::substream(p.seed, streams::SYNTHETIC, 2);
    let mut columns = vec![Column::new(
        schema::SRCH_DESTINATION_ID,
        ColumnData::Categorical((1..=p.n_destinations as i64).map(Some).collect()),
    )];
    for j in 1..=LATENT_COUNT {
        let values = (0..p.n_destinations)
            .map(|_| Some(-2.2 + 0.3 * noise.sample(&mut dr)))
            .collect();
        columns.push(Column::new(latent_name(j), ColumnData::Real(values)));
    }
    Ok((events, Dataset::new(columns)?))
}

/// Points uniform in `[-1, 1]^dim` labelled by their nearest of `classes`
/// random prototypes: noise-free, with oblique class boundaries.
pub fn separable_fixture(
    n: usize,
    dim: usize,
    classes: usize,
    seed: u64,
) -> Result<(FeatureMatrix, Vec<usize>)> {
    if n == 0 || dim == 0 || classes == 0 {
        return Err(Error::arg("separable fixture needs n, dim and classes ≥ 1"));
    }
    let mut r = rng::substream(seed, streams::SYNTHETIC, 3);
    let protos: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect())
        .collect();
    let labels = rows
        .iter()
        .map(|x| {
            let dist = |p: &Vec<f64>| -> f64 { p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum() };
            (0..classes)
                .min_by(|&a, &b| dist(&protos[a]).total_cmp(&dist(&protos[b])))
                .expect("classes ≥ 1")
        })
        .collect();
    Ok((FeatureMatrix::from_rows(&rows)?, labels))
}
