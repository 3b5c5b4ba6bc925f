//! Tabulated input and plot data output.

use std::io::{Read, Write};
use std::path::Path;

use alternant_core::{AlternatingSequence, EvaluableFunction, Function};
use anyhow::{bail, Context, Result};

/// Reads `t,value` rows. A first row that does not parse as numbers is taken
/// as a header.
pub fn read_samples<R: Read>(input: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(input);
    let (mut ts, mut vs) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("reading row {}", line + 1))?;
        if rec.len() < 2 {
            bail!("row {} has {} fields, expected t,value", line + 1, rec.len());
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(t), Ok(v)) => {
                ts.push(t);
                vs.push(v);
            }
            _ if line == 0 => continue,
            _ => bail!("row {}: cannot parse `{}`,`{}` as numbers", line + 1, &rec[0], &rec[1]),
        }
    }
    Ok((ts, vs))
}

pub fn load_tabulated(path: &Path) -> Result<EvaluableFunction> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (ts, vs) = read_samples(file)?;
    Ok(EvaluableFunction::tabulated(ts, vs)?)
}

/// Writes `t,f,fit,residual,pair` on `size` equispaced points plus the
/// alternation pair ends. `pair` holds the index of the pair containing `t`.
pub fn write_plot_csv<W: Write, F: Function + ?Sized, S: Function + ?Sized>(
    out: W,
    f: &F,
    fit: &S,
    alternation: Option<&AlternatingSequence>,
    size: usize,
) -> Result<()> {
    let mut ts = f.domain().grid(size);
    if let Some(seq) = alternation {
        ts.extend(seq.pairs.iter().flat_map(|&(a, b)| [a, b]));
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "f", "fit", "residual", "pair"])?;
    for t in ts {
        let (fv, sv) = (f.value(t), fit.value(t));
        let pair = alternation
            .and_then(|s| s.pairs.iter().position(|&(a, b)| a <= t && t <= b))
            .map(|j| j.to_string())
            .unwrap_or_default();
        w.write_record([t.to_string(), fv.to_string(), sv.to_string(), (sv - fv).to_string(), pair])?;
    }
    w.flush()?;
    Ok(())
}
