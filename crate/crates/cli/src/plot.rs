//! gnuplot scripts for the tables the CLI writes.

use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use stepfield::output::Table;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    Region,
    LambdaCurve,
    GlSweep,
}

impl PlotKind {
    fn columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::Region => &["alpha", "a", "admissible"],
            PlotKind::LambdaCurve => &["b", "lambda_over_b"],
            PlotKind::GlSweep => &["H", "mass"],
        }
    }
}

/// Script text for `table` (read from `data_path`).
pub fn plot_emit(data_path: &Path, kind: PlotKind) -> Result<String, CliError> {
    let file = std::fs::File::open(data_path)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", data_path.display())))?;
    let table = Table::read_csv(std::io::BufReader::new(file))?;
    let mut idx = Vec::new();
    for c in kind.columns() {
        match table.column(c) {
            Some(k) => idx.push(k + 1),
            None => {
                return Err(stepfield::Error::Parse(format!(
                    "{} has no column `{c}`",
                    data_path.display()
                ))
                .into())
            }
        }
    }
    let name = data_path.file_name().and_then(|n| n.to_str()).unwrap_or("data.csv");
    let stem = name.trim_end_matches(".csv");
    let head = format!(
        "set datafile separator ','\nset terminal pngcairo size 900,700\nset output '{stem}.png'\nset key off\n"
    );
    let body = match kind {
        PlotKind::Region => format!(
            "set xlabel 'alpha'\nset ylabel 'a'\nset xrange [0:pi]\nset yrange [-1:1]\n\
             set palette defined (0 'white', 1 'black')\nunset colorbox\n\
             plot '{name}' every ::1 using {}:{}:(strcol({}) eq 'true' ? 1 : 0) with points pt 5 ps 0.4 palette\n",
            idx[0], idx[1], idx[2]
        ),
        PlotKind::LambdaCurve => format!(
            "set xlabel 'b'\nset ylabel 'lambda(b)/b'\n\
             plot '{name}' every ::1 using {}:{} with linespoints pt 7\n",
            idx[0], idx[1]
        ),
        PlotKind::GlSweep => format!(
            "set xlabel 'H'\nset ylabel 'mass'\n\
             plot '{name}' every ::1 using {}:{} with linespoints pt 7\n",
            idx[0], idx[1]
        ),
    };
    Ok(head + &body)
}
