//! Architecture comparison rows and the predicted-time matrix, with CSV and
//! Markdown emitters that share one number formatter.

use super::{ArchKind, ArchSpec, StreamingForm, TimeOptions};
use crate::domain::{PencilGrid, DEVICE_MEMORY_BYTES};
use crate::{Error, Result};

/// Formats `x` with `sig` significant digits in plain decimal notation.
pub fn fmt_sig(x: f64, sig: u32) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// A header row plus string cells, written as CSV or as a Markdown table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Pipe table with columns padded to a common width.
    pub fn to_markdown(&self) -> String {
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain([self.headers[c].chars().count(), 3])
                    .max()
                    .unwrap_or(3)
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(s, &w)| format!("{s:>w$}"))
                .collect();
            format!("| {} |\n", padded.join(" | "))
        };
        let mut out = line(&self.headers);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }
}

/// One architecture's features in normalized units: time in
/// `t_clk·N³/2PR`, bandwidth in `4sR/t_clk`, local RAM in `s·N³/P` to
/// leading order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub kind: ArchKind,
    pub k: u32,
    pub time: f64,
    pub bandwidth: f64,
    pub ram: f64,
    pub local_dma: u32,
    pub host_dma: u32,
    pub fft_engines: u32,
    pub network: u32,
}

impl ComparisonRow {
    fn of(spec: &ArchSpec) -> Self {
        let per_engine = 4.0 * crate::WORD_BYTES as f64 * spec.rows as f64 / spec.t_clk;
        let c = spec.counts();
        ComparisonRow {
            kind: spec.kind,
            k: spec.k,
            time: 2.0 * spec.time_coefficient(StreamingForm::Printed),
            bandwidth: spec.bandwidth() / per_engine,
            ram: spec.memory_coefficient(),
            local_dma: c.local_dma,
            host_dma: c.host_dma,
            fft_engines: c.fft_engines,
            network: c.network,
        }
    }

    pub fn text_table(rows: &[ComparisonRow]) -> TextTable {
        let num = |x: f64| fmt_sig(x, 4);
        TextTable {
            headers: [
                "architecture",
                "k",
                "time",
                "bandwidth",
                "ram",
                "local_dma",
                "host_dma",
                "fft_engines",
                "network",
            ]
            .map(String::from)
            .to_vec(),
            rows: rows
                .iter()
                .map(|r| {
                    vec![
                        r.kind.name().to_string(),
                        r.k.to_string(),
                        num(r.time),
                        num(r.bandwidth),
                        format!("~{}", num(r.ram)),
                        r.local_dma.to_string(),
                        r.host_dma.to_string(),
                        r.fft_engines.to_string(),
                        r.network.to_string(),
                    ]
                })
                .collect(),
        }
    }
}

fn comparison_spec(kind: ArchKind, mu: u32, k: u32) -> ArchSpec {
    let mut s = ArchSpec::new(kind, 1024, 1, 1);
    s.mu = mu;
    s.k = k;
    s
}

fn check_mu_k(mu: u32, k: u32) -> Result<()> {
    if !(1..=3).contains(&mu) || k == 0 {
        return Err(Error::invalid(format!(
            "need 1 ≤ µ ≤ 3 and k ≥ 1, got µ = {mu}, k = {k}"
        )));
    }
    Ok(())
}

/// Sequential streaming, pipelined streaming and parallel nodes at equal `k`.
pub fn architecture_comparison(mu: u32, k: u32) -> Result<Vec<ComparisonRow>> {
    check_mu_k(mu, k)?;
    Ok([
        ArchKind::SequentialStreaming,
        ArchKind::PipelinedStreaming,
        ArchKind::Parallel,
    ]
    .map(|kind| ComparisonRow::of(&comparison_spec(kind, mu, k)))
    .to_vec())
}

/// Sequential and pipelined streaming nodes with the same engine count `q`.
pub fn fixed_q_comparison(mu: u32, q: u32) -> Result<Vec<ComparisonRow>> {
    if q == 0 || q % 4 != 0 {
        return Err(Error::invalid(format!(
            "Q = {q} must be a positive multiple of 4"
        )));
    }
    check_mu_k(mu, q)?;
    Ok(vec![
        ComparisonRow::of(&comparison_spec(ArchKind::SequentialStreaming, mu, q)),
        ComparisonRow::of(&comparison_spec(ArchKind::PipelinedStreaming, mu, q / 4)),
    ])
}

pub const DEFAULT_PREDICT_NS: [u64; 5] = [512, 1024, 2048, 4096, 8192];
pub const DEFAULT_PREDICT_PS: [u64; 6] = [1, 4, 16, 64, 256, 1024];

#[derive(Debug, Clone, PartialEq)]
pub struct PredictParams {
    pub ns: Vec<u64>,
    pub ps: Vec<u64>,
    pub mus: Vec<u32>,
    pub rows: u32,
    pub k: u32,
    pub f_hz: f64,
    pub device_bytes: u64,
    pub form: StreamingForm,
}

impl Default for PredictParams {
    fn default() -> Self {
        PredictParams {
            ns: DEFAULT_PREDICT_NS.to_vec(),
            ps: DEFAULT_PREDICT_PS.to_vec(),
            mus: vec![1, 3],
            rows: 4,
            k: 1,
            f_hz: 180e6,
            device_bytes: DEVICE_MEMORY_BYTES,
            form: StreamingForm::TableMatching,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictCell {
    pub mu: u32,
    pub n: u64,
    pub p: u64,
    /// `None` when the node's data does not fit device memory.
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictTable {
    pub params: PredictParams,
    /// Ordered by `µ`, then `N`, then `P`, as given in the parameters.
    pub cells: Vec<PredictCell>,
}

/// Pipelined streaming time per `(µ, N, P)` on square node grids. A cell is
/// infeasible when the leading-order footprint `2s·N³/P` exceeds the device.
pub fn predict_table(params: &PredictParams) -> Result<PredictTable> {
    if !(params.f_hz.is_finite() && params.f_hz > 0.0) {
        return Err(Error::invalid("frequency must be positive"));
    }
    let mut cells = Vec::new();
    for &mu in &params.mus {
        for &n in &params.ns {
            for &p in &params.ps {
                let grid = PencilGrid::square(n as usize, p as usize)?;
                let mut spec = ArchSpec::new(
                    ArchKind::PipelinedStreaming,
                    n,
                    grid.pu as u64,
                    grid.pv as u64,
                );
                spec.mu = mu;
                spec.k = params.k;
                spec.rows = params.rows;
                spec.t_clk = 1.0 / params.f_hz;
                spec.validate()?;
                let seconds = grid.fits_device(params.device_bytes).then(|| {
                    spec.total_time(TimeOptions {
                        exact: false,
                        streaming: params.form,
                    })
                });
                cells.push(PredictCell { mu, n, p, seconds });
            }
        }
    }
    Ok(PredictTable {
        params: params.clone(),
        cells,
    })
}

const PREDICT_DIGITS: u32 = 4;

impl PredictTable {
    pub fn get(&self, mu: u32, n: u64, p: u64) -> Option<&PredictCell> {
        self.cells
            .iter()
            .find(|c| c.mu == mu && c.n == n && c.p == p)
    }

    fn seconds_text(cell: &PredictCell) -> String {
        cell.seconds
            .map_or(String::new(), |s| fmt_sig(s, PREDICT_DIGITS))
    }

    /// One line per cell: `mu,n,p,seconds`, empty seconds when infeasible.
    pub fn long_table(&self) -> TextTable {
        TextTable {
            headers: ["mu", "n", "p", "seconds"].map(String::from).to_vec(),
            rows: self
                .cells
                .iter()
                .map(|c| {
                    vec![
                        c.mu.to_string(),
                        c.n.to_string(),
                        c.p.to_string(),
                        Self::seconds_text(c),
                    ]
                })
                .collect(),
        }
    }

    /// One `N × P` matrix per `µ`.
    pub fn matrix_tables(&self) -> Vec<(u32, TextTable)> {
        self.params
            .mus
            .iter()
            .map(|&mu| {
                let mut headers = vec!["N \\ P".to_string()];
                headers.extend(self.params.ps.iter().map(|p| p.to_string()));
                let rows = self
                    .params
                    .ns
                    .iter()
                    .map(|&n| {
                        let mut row = vec![n.to_string()];
                        row.extend(self.params.ps.iter().map(|&p| {
                            self.get(mu, n, p).map_or(String::new(), Self::seconds_text)
                        }));
                        row
                    })
                    .collect();
                (mu, TextTable { headers, rows })
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        self.long_table().to_csv()
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for (i, (mu, t)) in self.matrix_tables().iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push_str(&format!("µ = {mu}, seconds\n\n"));
            out.push_str(&t.to_markdown());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(1.4915, 4), "1.492");
        assert_eq!(fmt_sig(0.000182, 4), "0.0001820");
        assert_eq!(fmt_sig(2.0, 4), "2.000");
        assert_eq!(fmt_sig(1234.5, 2), "1234");
        assert_eq!(fmt_sig(0.0, 4), "0");
    }

    #[test]
    fn comparison_k1() {
        for mu in 1..=3u32 {
            let rows = architecture_comparison(mu, 1).unwrap();
            let m = mu as f64;
            let seq = &rows[0];
            assert_eq!((seq.time, seq.bandwidth, seq.ram), (2.0 * m, 1.0, 2.0));
            assert_eq!(
                (seq.local_dma, seq.host_dma, seq.fft_engines, seq.network),
                (2, 1, 1, 1)
            );
            let pipe = &rows[1];
            assert_eq!(
                (pipe.time, pipe.bandwidth, pipe.ram),
                ((m + 1.0) / 2.0, 1.0, 2.0)
            );
            assert_eq!(
                (
                    pipe.local_dma,
                    pipe.host_dma,
                    pipe.fft_engines,
                    pipe.network
                ),
                (4, 2, 4, 2)
            );
            let par = &rows[2];
            assert_eq!((par.time, par.bandwidth, par.ram), (2.0, m, 2.0 * m));
            assert_eq!(
                (par.local_dma, par.host_dma, par.fft_engines, par.network),
                (2 * mu, mu, mu, mu)
            );
            assert!((seq.time / pipe.time - 4.0 * m / (m + 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn comparison_fixed_q4() {
        for mu in 1..=3u32 {
            let m = mu as f64;
            let rows = fixed_q_comparison(mu, 4).unwrap();
            assert_eq!(
                (rows[0].time, rows[0].bandwidth, rows[0].ram),
                (m / 2.0, 4.0, 2.0)
            );
            assert_eq!(
                (rows[1].time, rows[1].bandwidth, rows[1].ram),
                ((m + 1.0) / 2.0, 1.0, 2.0)
            );
        }
        assert!(fixed_q_comparison(1, 6).is_err());
        assert!(architecture_comparison(0, 1).is_err());
        assert!(architecture_comparison(1, 0).is_err());
    }

    #[test]
    fn predict_anchors_and_mask() {
        let t = predict_table(&PredictParams::default()).unwrap();
        assert_eq!(t.cells.len(), 60);
        let s = |mu, n, p| t.get(mu, n, p).unwrap().seconds;
        assert!((s(3, 2048, 16).unwrap() - 1.49).abs() < 0.01);
        assert!((s(1, 2048, 16).unwrap() - 0.745).abs() < 0.001);
        assert!((s(3, 8192, 1024).unwrap() - 1.49).abs() < 0.01);
        assert!((s(1, 512, 1024).unwrap() - 1.8e-4).abs() < 0.05e-4);
        assert_eq!(s(1, 1024, 1), None);
        assert_eq!(s(3, 4096, 64), None);
        assert!(s(1, 4096, 256).is_some());
    }

    #[test]
    fn strong_scaling_is_exact() {
        let t = predict_table(&PredictParams {
            device_bytes: u64::MAX,
            ..Default::default()
        })
        .unwrap();
        for mu in [1, 3] {
            for n in DEFAULT_PREDICT_NS {
                let base = t.get(mu, n, 1).unwrap().seconds.unwrap();
                for p in DEFAULT_PREDICT_PS {
                    let v = t.get(mu, n, p).unwrap().seconds.unwrap();
                    assert!((v * p as f64 - base).abs() <= 1e-14 * base);
                }
            }
        }
    }

    #[test]
    fn csv_and_markdown_carry_same_numbers() {
        let t = predict_table(&PredictParams::default()).unwrap();
        let nums = |s: &str| {
            let mut v: Vec<String> = s
                .split(|c: char| c == ',' || c == '|' || c.is_whitespace())
                .filter(|w| w.contains('.'))
                .map(String::from)
                .collect();
            v.sort();
            v
        };
        let csv = t.to_csv();
        assert_eq!(nums(&csv), nums(&t.to_markdown()));
        assert_eq!(
            nums(&csv).len(),
            t.cells.iter().filter(|c| c.seconds.is_some()).count()
        );
        assert_eq!(
            csv,
            predict_table(&PredictParams::default()).unwrap().to_csv()
        );
    }

    #[test]
    fn markdown_layout() {
        let tt = TextTable {
            headers: vec!["a".into(), "bb".into()],
            rows: vec![vec!["1".into(), "".into()]],
        };
        assert_eq!(
            tt.to_markdown(),
            "|   a |  bb |\n|-----|-----|\n|   1 |     |\n"
        );
        assert_eq!(tt.to_csv(), "a,bb\n1,\n");
    }
}
