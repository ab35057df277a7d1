//! Published single-engine measurements and predicted 3D transform times,
//! kept as printed so generated values can be compared at printed precision.

use crate::fft_pipeline::{engine_metrics, EngineConfig, OperatorLatency};
use crate::Result;

const ENGINE_CSV: &str = include_str!("../../data/engine_published.csv");
const PREDICTED_CSV: &str = include_str!("../../data/predicted_published.csv");

/// A printed decimal: its value and the number of digits after the point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Printed {
    pub value: f64,
    pub decimals: u32,
}

impl Printed {
    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim();
        let value: f64 = s.parse().ok()?;
        let decimals = s.split_once('.').map_or(0, |(_, f)| f.len() as u32);
        Some(Printed { value, decimals })
    }

    /// Half a unit in the last printed place.
    pub fn half_ulp(&self) -> f64 {
        0.5 * 10f64.powi(-(self.decimals as i32))
    }

    /// Whether `x` rounds to the printed digits.
    pub fn matches(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.half_ulp() * (1.0 + 1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedEngineRow {
    pub rows: usize,
    pub n: usize,
    pub latency: OperatorLatency,
    pub f_mhz: f64,
    pub latency_cycles: u64,
    pub l_fft_us: Printed,
    pub t_fft_us: Printed,
    pub b_fft_gib: Printed,
    pub gflops: Printed,
}

impl PublishedEngineRow {
    pub fn config(&self) -> Result<EngineConfig> {
        EngineConfig::new(self.n, self.rows, self.latency, self.f_mhz * 1e6)
    }
}

fn field<T: std::str::FromStr>(s: &str) -> T {
    s.trim()
        .parse()
        .unwrap_or_else(|_| panic!("malformed fixture field {s:?}"))
}

/// The 60 published engine rows (`R ∈ {1,2,4}`, four latency settings,
/// `N = 512 … 8192`).
pub fn engine_published() -> Vec<PublishedEngineRow> {
    ENGINE_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            let printed = |s: &str| Printed::parse(s).expect("printed number");
            PublishedEngineRow {
                rows: field(c[0]),
                n: field(c[1]),
                latency: OperatorLatency::new(field(c[2]), field(c[3]), field(c[4]))
                    .expect("fixture latency"),
                f_mhz: field(c[5]),
                latency_cycles: field(c[6]),
                l_fft_us: printed(c[7]),
                t_fft_us: printed(c[8]),
                b_fft_gib: printed(c[9]),
                gflops: printed(c[10]),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedPrediction {
    pub mu: u32,
    pub n: u64,
    pub p: u64,
    /// `None` for cells left empty because the data does not fit.
    pub seconds: Option<Printed>,
}

pub fn predicted_published() -> Vec<PublishedPrediction> {
    PREDICTED_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let c: Vec<&str> = line.split(',').collect();
            PublishedPrediction {
                mu: field(c[0]),
                n: field(c[1]),
                p: field(c[2]),
                seconds: Printed::parse(c[3]),
            }
        })
        .collect()
}

/// Generated figures for one published engine row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineRowCheck {
    pub row: PublishedEngineRow,
    pub l_fft: u64,
    /// Time columns are evaluated at one cycle beyond the closed-form
    /// latency, the convention the published microsecond columns follow.
    pub l_fft_us: f64,
    pub t_fft_us: f64,
    pub b_fft_gib: f64,
    pub gflops: f64,
}

impl EngineRowCheck {
    pub fn latency_delta(&self) -> i64 {
        self.row.latency_cycles as i64 - self.l_fft as i64
    }

    pub fn latency_ok(&self) -> bool {
        self.latency_delta().abs() <= 1
    }

    pub fn times_ok(&self) -> bool {
        self.row.l_fft_us.matches(self.l_fft_us) && self.row.t_fft_us.matches(self.t_fft_us)
    }

    pub fn rates_ok(&self) -> bool {
        self.row.b_fft_gib.matches(self.b_fft_gib) && self.row.gflops.matches(self.gflops)
    }

    pub fn all_ok(&self) -> bool {
        self.latency_ok() && self.times_ok() && self.rates_ok()
    }
}

pub fn check_engine_row(row: &PublishedEngineRow) -> Result<EngineRowCheck> {
    let cfg = row.config()?;
    let m = engine_metrics(&cfg);
    let registered = (m.l_fft + 1) as f64 * cfg.t_clk * 1e6;
    Ok(EngineRowCheck {
        row: *row,
        l_fft: m.l_fft,
        l_fft_us: registered,
        t_fft_us: registered + cfg.steps() as f64 * cfg.t_clk * 1e6,
        b_fft_gib: m.b_fft_gib,
        gflops: m.gflops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_parsing() {
        let p = Printed::parse("7.45").unwrap();
        assert_eq!((p.value, p.decimals), (7.45, 2));
        assert!(p.matches(7.454) && !p.matches(7.456));
        let p = Printed::parse("38").unwrap();
        assert!(p.matches(38.4) && !p.matches(38.6));
        assert_eq!(Printed::parse(""), None);
    }

    #[test]
    fn fixtures_load() {
        let rows = engine_published();
        assert_eq!(rows.len(), 60);
        for r in [1, 2, 4] {
            assert_eq!(rows.iter().filter(|x| x.rows == r).count(), 20);
        }
        let first = rows[0];
        assert_eq!(
            (first.rows, first.n, first.f_mhz, first.latency_cycles),
            (1, 512, 250.0, 382)
        );
        let pred = predicted_published();
        assert_eq!(pred.len(), 60);
        assert_eq!(pred.iter().filter(|c| c.seconds.is_none()).count(), 24);
    }

    #[test]
    fn anchor_rows() {
        let rows = engine_published();
        let find = |r: usize, n: usize, l: u32| {
            *rows
                .iter()
                .find(|x| x.rows == r && x.n == n && x.latency.stage_a == l)
                .unwrap()
        };
        let c = check_engine_row(&find(1, 512, 3)).unwrap();
        assert_eq!((c.l_fft, c.row.latency_cycles), (381, 382));
        assert!(c.all_ok());
        let c = check_engine_row(&find(1, 1024, 6)).unwrap();
        assert_eq!((c.l_fft, c.row.latency_cycles), (741, 742));
        let c = check_engine_row(&find(4, 2048, 9)).unwrap();
        assert!((c.gflops - 165.44).abs() < 0.005);
    }
}
