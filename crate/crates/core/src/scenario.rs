//! Day-ahead profiles and seeded forecast-error scenarios.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{realized_state, DayAheadForecast, ExogenousSample, ForecastRow};

/// One constant-price tier over the one-based periods `first..=last`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceTier {
    pub first: usize,
    pub last: usize,
    /// $/MWh
    pub price: f64,
}

/// Step-function electricity price over the day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceSchedule {
    pub tiers: Vec<PriceTier>,
}

impl Default for PriceSchedule {
    fn default() -> Self {
        let tier = |first, last, price| PriceTier { first, last, price };
        PriceSchedule {
            tiers: vec![
                tier(1, 24, 35.0),
                tier(25, 40, 60.0),
                tier(41, 60, 95.0),
                tier(61, 72, 60.0),
                tier(73, 84, 95.0),
                tier(85, 96, 60.0),
            ],
        }
    }
}

impl PriceSchedule {
    /// Checks that the tiers cover `1..=horizon` in order without gaps.
    pub fn validate(&self, horizon: usize) -> Result<()> {
        let mut next = 1;
        for t in &self.tiers {
            if t.first != next || t.last < t.first {
                return Err(Error::param(
                    "prices.tiers",
                    format!(
                        "tiers must partition periods 1..={horizon} in order (tier starting at {})",
                        t.first
                    ),
                ));
            }
            if !(t.price > 0.0 && t.price.is_finite()) {
                return Err(Error::param("prices.tiers", "prices must be positive"));
            }
            next = t.last + 1;
        }
        if next != horizon + 1 {
            return Err(Error::param(
                "prices.tiers",
                format!("tiers end at period {}, expected {horizon}", next - 1),
            ));
        }
        Ok(())
    }

    /// Price of each zero-based period.
    pub fn prices(&self, horizon: usize) -> Result<Vec<f64>> {
        self.validate(horizon)?;
        Ok(self
            .tiers
            .iter()
            .flat_map(|t| std::iter::repeat_n(t.price, t.last - t.first + 1))
            .collect())
    }
}

/// Linear interpolation through `(one-based period, value)` knots.
fn interpolate(knots: &[(f64, f64)], horizon: usize) -> Vec<f64> {
    (1..=horizon)
        .map(|p| {
            let p = p as f64;
            let i = knots
                .partition_point(|k| k.0 <= p)
                .clamp(1, knots.len() - 1);
            let (x0, y0) = knots[i - 1];
            let (x1, y1) = knots[i];
            let w = ((p - x0) / (x1 - x0)).clamp(0.0, 1.0);
            y0 + w * (y1 - y0)
        })
        .collect()
}

/// Knots `(one-based period, value)` of the synthetic day, linearly
/// interpolated. Heat demand rises in sharp steps and relaxes slowly between
/// them; electric demand peaks in periods 73-80; wind stays below capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileShape {
    pub wind: Vec<(f64, f64)>,
    pub demand_e: Vec<(f64, f64)>,
    pub demand_q: Vec<(f64, f64)>,
}

impl Default for ProfileShape {
    fn default() -> Self {
        ProfileShape {
            wind: vec![
                (1.0, 2.8),
                (20.0, 3.2),
                (36.0, 1.6),
                (52.0, 0.8),
                (68.0, 1.6),
                (84.0, 2.6),
                (96.0, 3.0),
            ],
            demand_e: vec![
                (1.0, 20.0),
                (24.0, 19.0),
                (32.0, 27.0),
                (44.0, 30.0),
                (56.0, 33.0),
                (68.0, 35.0),
                (73.0, 41.5),
                (76.0, 42.0),
                (80.0, 41.5),
                (84.0, 37.0),
                (96.0, 24.0),
            ],
            demand_q: vec![
                (1.0, 30.0),
                (16.0, 28.0),
                (17.0, 40.0),
                (28.0, 30.0),
                (29.0, 42.0),
                (40.0, 33.0),
                (41.0, 45.0),
                (52.0, 36.0),
                (53.0, 48.0),
                (64.0, 40.0),
                (65.0, 52.0),
                (81.0, 46.0),
                (82.0, 56.0),
                (96.0, 44.0),
            ],
        }
    }
}

impl ProfileShape {
    pub fn build(&self, prices: &PriceSchedule, horizon: usize) -> Result<DayAheadForecast> {
        for (name, knots) in [
            ("wind", &self.wind),
            ("demand_e", &self.demand_e),
            ("demand_q", &self.demand_q),
        ] {
            if knots.len() < 2 || knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                return Err(Error::param(
                    &format!("profiles.{name}"),
                    "needs at least two knots with increasing periods",
                ));
            }
        }
        DayAheadForecast::new(
            interpolate(&self.wind, horizon),
            interpolate(&self.demand_e, horizon),
            prices.prices(horizon)?,
            interpolate(&self.demand_q, horizon),
        )
    }
}

/// The built-in synthetic day.
pub fn default_profiles(prices: &PriceSchedule, horizon: usize) -> Result<DayAheadForecast> {
    ProfileShape::default().build(prices, horizon)
}

/// Relative standard deviations of the forecast errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ErrorModel {
    pub wind_rel_std: f64,
    pub demand_e_rel_std: f64,
    pub price_rel_std: f64,
    pub demand_q_rel_std: f64,
}

impl Default for ErrorModel {
    fn default() -> Self {
        ErrorModel {
            wind_rel_std: 0.10,
            demand_e_rel_std: 0.05,
            price_rel_std: 0.05,
            demand_q_rel_std: 0.05,
        }
    }
}

impl ErrorModel {
    pub fn zero() -> Self {
        ErrorModel {
            wind_rel_std: 0.0,
            demand_e_rel_std: 0.0,
            price_rel_std: 0.0,
            demand_q_rel_std: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, s) in [
            ("wind_rel_std", self.wind_rel_std),
            ("demand_e_rel_std", self.demand_e_rel_std),
            ("price_rel_std", self.price_rel_std),
            ("demand_q_rel_std", self.demand_q_rel_std),
        ] {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::param(
                    &format!("errors.{name}"),
                    "must be finite and nonnegative",
                ));
            }
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard normal draw keyed by `(seed, scenario, period, quantity)`.
pub fn keyed_normal(seed: u64, scenario: usize, period: usize, quantity: u64) -> f64 {
    let key = mix(mix(mix(seed) ^ scenario as u64) ^ period as u64) ^ quantity;
    let mut rng = ChaCha8Rng::seed_from_u64(mix(key));
    StandardNormal.sample(&mut rng)
}

/// Derives an independent seed for a named purpose.
pub fn derive_seed(seed: u64, purpose: &str) -> u64 {
    purpose.bytes().fold(mix(seed), |h, b| mix(h ^ b as u64))
}

/// A forecast together with a reproducible family of realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub forecast: DayAheadForecast,
    pub errors: ErrorModel,
    pub seed: u64,
    pub count: usize,
}

/// Serializable description of a scenario set without the profile arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    pub seed: u64,
    pub count: usize,
    pub horizon: usize,
    pub errors: ErrorModel,
}

impl ScenarioSet {
    pub fn new(
        forecast: DayAheadForecast,
        errors: ErrorModel,
        seed: u64,
        count: usize,
    ) -> Result<Self> {
        forecast.validate()?;
        errors.validate()?;
        Ok(ScenarioSet {
            forecast,
            errors,
            seed,
            count,
        })
    }

    pub fn horizon(&self) -> usize {
        self.forecast.len()
    }

    /// Realized exogenous values of one period of one scenario.
    pub fn realized_row(&self, scenario: usize, period: usize) -> ForecastRow {
        realized_state(
            &self.forecast.row(period),
            &self.sample_errors(scenario, period),
        )
    }

    /// Forecast errors of one period of one scenario.
    pub fn sample_errors(&self, scenario: usize, period: usize) -> ExogenousSample {
        let f = self.forecast.row(period);
        let e = &self.errors;
        let draw = |q: u64, std: f64, value: f64| {
            let s = std * value;
            if s == 0.0 {
                0.0
            } else {
                s * keyed_normal(self.seed, scenario, period, q)
            }
        };
        ExogenousSample {
            wind_error: draw(0, e.wind_rel_std, f.wind),
            demand_e_error: draw(1, e.demand_e_rel_std, f.demand_e),
            price_error: draw(2, e.price_rel_std, f.price),
            demand_q_error: draw(3, e.demand_q_rel_std, f.demand_q),
        }
    }

    /// Realized exogenous series of one scenario (forecast plus clamped errors).
    pub fn realized(&self, scenario: usize) -> Vec<ForecastRow> {
        (0..self.horizon())
            .map(|t| self.realized_row(scenario, t))
            .collect()
    }

    /// Forecast rows, the same for every scenario.
    pub fn forecast_rows(&self) -> Vec<ForecastRow> {
        (0..self.horizon()).map(|t| self.forecast.row(t)).collect()
    }

    pub fn manifest(&self) -> ScenarioManifest {
        ScenarioManifest {
            seed: self.seed,
            count: self.count,
            horizon: self.horizon(),
            errors: self.errors.clone(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRecord {
    period: usize,
    wind: f64,
    demand_e: f64,
    price: f64,
    demand_q: f64,
}

/// Writes `period,wind,demand_e,price,demand_q` rows with zero-based periods.
pub fn write_profiles_csv<W: std::io::Write>(forecast: &DayAheadForecast, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in 0..forecast.len() {
        let r = forecast.row(t);
        w.serialize(ProfileRecord {
            period: r.period,
            wind: r.wind,
            demand_e: r.demand_e,
            price: r.price,
            demand_q: r.demand_q,
        })
        .map_err(|e| Error::Serde(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Serde(e.to_string()))?;
    Ok(())
}

pub fn read_profiles_csv<R: std::io::Read>(input: R) -> Result<DayAheadForecast> {
    let mut rd = csv::Reader::from_reader(input);
    let (mut wind, mut demand_e, mut price, mut demand_q) = (vec![], vec![], vec![], vec![]);
    for (i, rec) in rd.deserialize::<ProfileRecord>().enumerate() {
        let rec = rec.map_err(|e| Error::Serde(e.to_string()))?;
        if rec.period != i {
            return Err(Error::Dimension(format!(
                "profile row {i} has period {}, expected consecutive zero-based periods",
                rec.period
            )));
        }
        wind.push(rec.wind);
        demand_e.push(rec.demand_e);
        price.push(rec.price);
        demand_q.push(rec.demand_q);
    }
    DayAheadForecast::new(wind, demand_e, price, demand_q)
}

pub fn load_profiles(path: &Path) -> Result<DayAheadForecast> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_profiles_csv(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(errors: ErrorModel) -> ScenarioSet {
        let f = default_profiles(&PriceSchedule::default(), 96).unwrap();
        ScenarioSet::new(f, errors, 7, 20).unwrap()
    }

    #[test]
    fn default_day_shape() {
        let f = default_profiles(&PriceSchedule::default(), 96).unwrap();
        assert_eq!(f.len(), 96);
        assert!(f.wind.iter().all(|&w| (0.0..=3.6).contains(&w)));
        let peak = (0..96)
            .max_by(|&a, &b| f.demand_e[a].total_cmp(&f.demand_e[b]))
            .unwrap();
        assert!((72..80).contains(&peak), "peak at zero-based {peak}");
        // heat must stay within CCGT + GB + HP coverage
        assert!(f.demand_q.iter().all(|&q| q > 15.0 && q < 70.0));
        assert_eq!(f.price[0], 35.0);
        assert_eq!(f.price[23], 35.0);
        assert_eq!(f.price[40], 95.0);
        assert_eq!(f.price[59], 95.0);
        assert_eq!(f.price[72], 95.0);
        assert_eq!(f.price[95], 60.0);
    }

    #[test]
    fn bad_knots_rejected() {
        let mut shape = ProfileShape {
            wind: vec![(1.0, 1.0)],
            ..ProfileShape::default()
        };
        assert!(shape.build(&PriceSchedule::default(), 96).is_err());
        shape.wind = vec![(5.0, 1.0), (2.0, 1.0)];
        assert!(shape.build(&PriceSchedule::default(), 96).is_err());
    }

    #[test]
    fn tier_validation() {
        let mut p = PriceSchedule::default();
        assert!(p.validate(96).is_ok());
        assert!(p.validate(95).is_err());
        p.tiers[1].first = 26;
        assert!(p.validate(96).is_err());
    }

    #[test]
    fn zero_std_reproduces_forecast() {
        let s = set(ErrorModel::zero());
        assert_eq!(s.realized(3), s.forecast_rows());
    }

    #[test]
    fn draws_are_keyed() {
        let s = set(ErrorModel::default());
        assert_eq!(s.sample_errors(4, 10), s.sample_errors(4, 10));
        assert_ne!(s.sample_errors(4, 10), s.sample_errors(5, 10));
        assert_ne!(s.sample_errors(4, 10), s.sample_errors(4, 11));
        assert!(s
            .realized(2)
            .iter()
            .all(|r| r.wind >= 0.0 && r.demand_q >= 0.0));
    }

    #[test]
    fn empirical_std_matches() {
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|i| keyed_normal(11, i, 3, 1)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.02);
        assert!((var.sqrt() - 1.0).abs() < 0.02);
    }

    #[test]
    fn csv_round_trip() {
        let f = default_profiles(&PriceSchedule::default(), 96).unwrap();
        let mut buf = Vec::new();
        write_profiles_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("period,wind,demand_e,price,demand_q"));
        assert_eq!(read_profiles_csv(buf.as_slice()).unwrap(), f);
    }
}
