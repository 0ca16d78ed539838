//! CSV tables and SVG plots of sweep results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::MetricsRecord;
use crate::error::{invalid, Error, Result};

/// One CSV row: `mode,snr_db,U,mod_order,blocks,ber,amp_ber,phase_ber,ser,se`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRecord {
    pub mode: String,
    pub snr_db: f64,
    #[serde(rename = "U")]
    pub antennas: usize,
    pub mod_order: usize,
    pub blocks: u64,
    pub ber: f64,
    pub amp_ber: f64,
    pub phase_ber: f64,
    pub ser: f64,
    pub se: f64,
}

pub const CSV_HEADER: &str = "mode,snr_db,U,mod_order,blocks,ber,amp_ber,phase_ber,ser,se";

impl From<&MetricsRecord> for CsvRecord {
    fn from(r: &MetricsRecord) -> Self {
        Self {
            mode: r.mode.to_string(),
            snr_db: r.snr_db,
            antennas: r.antennas,
            mod_order: r.mod_order,
            blocks: r.blocks,
            ber: r.ber,
            amp_ber: r.amp_ber,
            phase_ber: r.phase_ber,
            ser: r.ser,
            se: r.spectral_efficiency,
        }
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_owned(), source }
}

/// Writes the header (always) and one row per record.
pub fn write_csv<W: std::io::Write>(records: &[MetricsRecord], out: W) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.serialize(CsvRecord::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[MetricsRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.to_owned(), source })?;
    write_csv(records, file).map_err(csv_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err(path))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

struct Panel {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Panel {
    fn x(&self, t: f64) -> f64 {
        self.left + t * self.width
    }

    fn y(&self, t: f64) -> f64 {
        self.top + (1.0 - t) * self.height
    }
}

/// Two panels: BER on a log axis and spectral efficiency on a linear axis,
/// both against SNR, one curve per (mode, U, modulation order).
pub fn render_svg(records: &[MetricsRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(invalid("nothing to plot"));
    }
    let mut series: BTreeMap<(String, usize, usize), Vec<&MetricsRecord>> = BTreeMap::new();
    for r in records {
        series.entry((r.mode.to_string(), r.antennas, r.mod_order)).or_default().push(r);
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
    }

    let (mut x_lo, mut x_hi) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.snr_db), hi.max(r.snr_db))
    });
    if x_hi - x_lo < 1e-9 {
        x_lo -= 1.0;
        x_hi += 1.0;
    }
    let min_ber = records.iter().map(|r| r.ber).filter(|&b| b > 0.0).fold(1.0f64, f64::min);
    let dec_lo = min_ber.log10().floor().clamp(-12.0, -1.0);
    let se_hi = records.iter().map(|r| r.spectral_efficiency).fold(0.0f64, f64::max).ceil().max(1.0);

    let w = 960.0;
    let h = 420.0;
    let panels = [
        Panel { left: 70.0, top: 40.0, width: 340.0, height: 300.0 },
        Panel { left: 520.0, top: 40.0, width: 340.0, height: 300.0 },
    ];
    let tx = |x: f64| (x - x_lo) / (x_hi - x_lo);
    let ty_ber = |b: f64| (b.max(10f64.powf(dec_lo)).log10() - dec_lo) / -dec_lo;
    let ty_se = |s: f64| s / se_hi;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, title) in panels.iter().zip(["BER", "Spectral efficiency (bit/use)"]) {
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            p.left, p.top, p.width, p.height
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{title}</text>"#, p.x(0.5), p.top - 12.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">SNR (dB)</text>"#, p.x(0.5), p.y(0.0) + 36.0);
        let ticks = 5;
        for i in 0..=ticks {
            let t = i as f64 / ticks as f64;
            let val = x_lo + t * (x_hi - x_lo);
            let _ = writeln!(
                s,
                r##"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="#ddd"/><text x="{x}" y="{}" text-anchor="middle">{val:.1}</text>"##,
                p.y(0.0),
                p.y(1.0),
                p.y(0.0) + 16.0,
                x = p.x(t)
            );
        }
    }
    let ber = &panels[0];
    let decades = (-dec_lo) as i32;
    for d in 0..=decades {
        let t = d as f64 / decades as f64;
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">1e{}</text>"##,
            ber.x(0.0),
            ber.x(1.0),
            ber.x(0.0) - 6.0,
            ber.y(t) + 4.0,
            dec_lo as i32 + d,
            y = ber.y(t)
        );
    }
    let se = &panels[1];
    let se_ticks = se_hi as usize;
    for k in 0..=se_ticks {
        let t = k as f64 / se_ticks as f64;
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{k}</text>"##,
            se.x(0.0),
            se.x(1.0),
            se.x(0.0) - 6.0,
            se.y(t) + 4.0,
            y = se.y(t)
        );
    }

    for (n, ((mode, u, order), pts)) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        for (p, is_ber) in [(ber, true), (se, false)] {
            let ty = |r: &MetricsRecord| if is_ber { ty_ber(r.ber) } else { ty_se(r.spectral_efficiency) };
            let coords: Vec<String> =
                pts.iter().map(|r| format!("{:.2},{:.2}", p.x(tx(r.snr_db)), p.y(ty(r)))).collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                coords.join(" ")
            );
            for c in &coords {
                let (cx, cy) = c.split_once(',').expect("formatted pair");
                let _ = writeln!(s, r#"<circle cx="{cx}" cy="{cy}" r="2.5" fill="{color}"/>"#);
            }
        }
        let ly = 370.0 + 14.0 * (n / 3) as f64;
        let lx = 70.0 + 300.0 * (n % 3) as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{mode}, U={u}, {order}-ary</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_svg(records: &[MetricsRecord], path: &Path) -> Result<()> {
    let svg = render_svg(records)?;
    std::fs::write(path, svg).map_err(|source| Error::Io { path: path.to_owned(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Mode;
    use crate::harness::metrics::Tally;

    fn rec(mode: Mode, snr: f64, errors: u64) -> MetricsRecord {
        let t = Tally {
            blocks: 3,
            symbols: 100,
            symbol_errors: errors,
            amp_bits: 100,
            amp_bit_errors: errors / 2,
            phase_bits: 300,
            phase_bit_errors: errors - errors / 2,
        };
        MetricsRecord::from_tally(mode, snr, 96, 16, &t, 1.0, 4, 0.05)
    }

    #[test]
    fn header_is_exact_and_always_present() {
        let mut buf = Vec::new();
        write_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER);
    }

    #[test]
    fn one_row_per_record() {
        let mut buf = Vec::new();
        let recs = [rec(Mode::Coherent, 0.0, 10), rec(Mode::Coherent, 5.0, 3), rec(Mode::DifferentialOnebit, 0.0, 7)];
        write_csv(&recs, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(1).unwrap().starts_with("coherent,0.0,96,16,3,"));
    }

    #[test]
    fn svg_has_both_panels_and_one_legend_entry_per_series() {
        let recs = [rec(Mode::Coherent, 0.0, 10), rec(Mode::Coherent, 5.0, 0), rec(Mode::DifferentialVqlNn, 0.0, 7)];
        let svg = render_svg(&recs).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("BER") && svg.contains("Spectral efficiency"));
        assert_eq!(svg.matches("<polyline").count(), 4);
        assert!(svg.contains("coherent, U=96") && svg.contains("differential-vql-nn, U=96"));
        assert!(render_svg(&[]).is_err());
    }
}
