use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use hyperfour::biortho::BiorthoTable;
use hyperfour::expand::{expand_boundary, BoundaryFunction, SampledBoundary};
use hyperfour::halfplane::{average_height, average_height_leading, flycatcher_height, HPoint};
use hyperfour::hfs::HfsCoefficients;
use hyperfour::kleingordon::{kg_interp_solution, Axis, LatticeData};
use hyperfour::real::C64;
use hyperfour::verify::{run_criterion, CRITERIA};
use hyperfour::{HfError, Result};

/// Hyperbolic Fourier series toolkit.
#[derive(Parser, Debug)]
#[command(name = "hyperfour", version, about)]
struct Cli {
    /// Worker threads for the parallel library routines (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample A_n and B_n on a grid and write CSV.
    Coeffs {
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
        /// `start:stop:step`, endpoints inclusive.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Table size; defaults to |n|.
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expand boundary data on the unit semicircle and write JSON coefficients.
    Expand {
        /// `const:RE[,IM]`, `cauchy:X`, `exp:N`, `invexp:N` or `csv:PATH`.
        #[arg(long, allow_hyphen_values = true)]
        boundary: String,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        /// Fail when the extraction invariance exceeds this value.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a coefficient file at a point `τ` of the upper half-plane.
    Eval {
        #[arg(long)]
        coeffs: PathBuf,
        /// Complex number such as `0.3+0.8i`.
        #[arg(long, allow_hyphen_values = true)]
        tau: String,
    },
    /// Tabulate a Klein-Gordon solution on a tensor grid and write CSV.
    Kg {
        /// Lattice data JSON with `alpha` and `beta` maps.
        #[arg(long, conflicts_with = "n")]
        lattice: Option<PathBuf>,
        /// Index of a single interpolating solution.
        #[arg(long, allow_hyphen_values = true)]
        n: Option<i64>,
        #[arg(long, value_enum, default_value_t = AxisArg::X)]
        axis: AxisArg,
        /// Grid for x, `start:stop:step`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Grid for y; defaults to the x grid.
        #[arg(long, allow_hyphen_values = true)]
        grid_y: Option<String>,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fly-catcher height of a point, or the mean height along `Im τ = y`.
    Height {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "mean_y")]
        tau: Option<String>,
        #[arg(long)]
        mean_y: Option<f64>,
        #[arg(long, default_value_t = 4096)]
        points: usize,
    },
    /// Run the reference checks; exit status 0 iff all pass.
    Verify {
        /// Comma-separated subset of criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AxisArg {
    X,
    Y,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Axis {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || HfError::InvalidInput(format!("grid `{spec}` is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let (start, stop, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(HfError::InvalidInput(format!(
            "grid `{spec}` needs step > 0 and start ≤ stop"
        )));
    }
    let ratio = (stop - start) / step;
    let steps = if (ratio - ratio.round()).abs() <= 1e-12 * ratio.max(1.0) {
        ratio.round() as usize
    } else {
        ratio.floor() as usize + 1
    };
    Ok((0..=steps)
        .map(|k| (start + k as f64 * step).min(stop))
        .collect())
}

fn parse_complex(s: &str) -> Result<C64> {
    let bad = || HfError::InvalidInput(format!("`{s}` is not a complex number like 0.3+0.8i"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return t
            .parse::<f64>()
            .map(|re| C64::new(re, 0.0))
            .map_err(|_| bad());
    };
    let split = body
        .char_indices()
        .skip(1)
        .filter(|&(k, c)| (c == '+' || c == '-') && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
        .map(|(k, _)| k)
        .last();
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    Ok(C64::new(
        re.parse().map_err(|_| bad())?,
        im.trim_start_matches('+').parse().map_err(|_| bad())?,
    ))
}

fn parse_boundary(spec: &str) -> Result<BoundaryFunction> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| HfError::InvalidInput(format!("boundary `{spec}` needs KIND:ARG")))?;
    let bad = || HfError::InvalidInput(format!("cannot parse the argument of boundary `{spec}`"));
    Ok(match kind {
        "const" => {
            let mut it = arg.split(',').map(|p| p.trim().parse::<f64>());
            let re = it.next().ok_or_else(bad)?.map_err(|_| bad())?;
            let im = it.next().transpose().map_err(|_| bad())?.unwrap_or(0.0);
            BoundaryFunction::Constant(C64::new(re, im))
        }
        "cauchy" => BoundaryFunction::Cauchy(arg.parse().map_err(|_| bad())?),
        "exp" => BoundaryFunction::PureExponential(arg.parse().map_err(|_| bad())?),
        "invexp" => BoundaryFunction::InvertedExponential(arg.parse().map_err(|_| bad())?),
        "csv" => BoundaryFunction::Sampled(SampledBoundary::load(arg.as_ref())?),
        _ => {
            return Err(HfError::InvalidInput(format!(
                "unknown boundary kind `{kind}`; use const, cauchy, exp, invexp or csv"
            )))
        }
    })
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn run(cli: Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| HfError::InvalidInput(format!("thread pool: {e}")))?;
    }
    let mut so = io::stdout().lock();
    match cli.command {
        Command::Coeffs {
            n,
            grid,
            n_max,
            out,
        } => {
            let xs = parse_grid(&grid)?;
            let n_max = n_max.unwrap_or(n.unsigned_abs() as usize).max(1);
            let table = BiorthoTable::new(n_max)?;
            let mut w = output(&out)?;
            table.write_csv(&mut w, n, &xs)?;
            w.flush()?;
        }
        Command::Expand {
            boundary,
            n_max,
            tol,
            out,
        } => {
            if n_max == 0 {
                return Err(HfError::InvalidInput("--n-max must be at least 1".into()));
            }
            let f = parse_boundary(&boundary)?;
            let exp = expand_boundary(&f, n_max)?;
            eprintln!(
                "invariance {:e}, boundary residual {:e}",
                exp.invariance, exp.boundary_residual
            );
            if let Some(tol) = tol {
                if exp.invariance > tol {
                    return Err(HfError::ConvergenceError {
                        what: format!("extraction invariance above --tol {tol:e}"),
                        achieved: exp.invariance,
                    });
                }
            }
            let mut w = output(&out)?;
            writeln!(w, "{}", exp.coeffs.to_json_string()?)?;
            w.flush()?;
        }
        Command::Eval { coeffs, tau } => {
            let c = HfsCoefficients::load(&coeffs)?;
            let v = c.eval(parse_complex(&tau)?)?;
            writeln!(so, "{} {}", v.re, v.im)?;
        }
        Command::Kg {
            lattice,
            n,
            axis,
            grid,
            grid_y,
            n_max,
            out,
        } => {
            let xs = parse_grid(&grid)?;
            let ys = match &grid_y {
                Some(g) => parse_grid(g)?,
                None => xs.clone(),
            };
            let table = Arc::new(BiorthoTable::new(n_max.max(1))?);
            let w = match (lattice, n) {
                (Some(p), _) => LatticeData::load(&p)?.solution(table)?,
                (None, Some(n)) => kg_interp_solution(table, n, axis.into())?,
                (None, None) => {
                    return Err(HfError::InvalidInput("kg needs --lattice or --n".into()))
                }
            };
            let mut o = output(&out)?;
            w.write_grid_csv(&mut o, &xs, &ys)?;
            o.flush()?;
        }
        Command::Height {
            tau,
            mean_y,
            points,
        } => {
            if let Some(y) = mean_y {
                let mean = average_height(y, points)?;
                writeln!(
                    so,
                    "y = {y}, points = {points}, mean height = {mean}, leading term = {}",
                    average_height_leading(y)
                )?;
            }
            if let Some(t) = tau {
                let h = flycatcher_height(HPoint::new(parse_complex(&t)?)?)?;
                writeln!(so, "height = {}, mesh point = {}", h.n, h.is_mesh)?;
                for (k, z) in h.orbit.iter().enumerate() {
                    writeln!(so, "  tau_{k} = {z}")?;
                }
            }
        }
        Command::Verify { only } => {
            let ids: Vec<u8> = if only.is_empty() {
                CRITERIA.to_vec()
            } else {
                only
            };
            let mut all = true;
            for id in ids {
                let report = run_criterion(id)
                    .ok_or_else(|| HfError::InvalidInput(format!("no criterion {id}")))?;
                writeln!(so, "{report}")?;
                for c in &report.checks {
                    writeln!(
                        so,
                        "    {} {:<44} {:.3e} (tol {:.1e})",
                        if c.passed() { "ok  " } else { "FAIL" },
                        c.label,
                        c.measured,
                        c.tolerance
                    )?;
                }
                all &= report.passed();
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(HfError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-5:5:0.01").unwrap().len(), 1001);
        assert_eq!(parse_grid("0:0:1").unwrap(), vec![0.0]);
        let g = parse_grid("0:1:0.3").unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(parse_complex("0+1i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("0.3-0.8i").unwrap(), C64::new(0.3, -0.8));
        assert_eq!(parse_complex("-2e-3+1e-2i").unwrap(), C64::new(-2e-3, 1e-2));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert_eq!(parse_complex("2.5i").unwrap(), C64::new(0.0, 2.5));
        assert!(parse_complex("x+yi").is_err());
    }

    #[test]
    fn boundaries() {
        assert!(matches!(
            parse_boundary("const:1").unwrap(),
            BoundaryFunction::Constant(_)
        ));
        assert!(matches!(
            parse_boundary("cauchy:0.7").unwrap(),
            BoundaryFunction::Cauchy(_)
        ));
        assert!(parse_boundary("nope:1").is_err());
        assert!(parse_boundary("const").is_err());
    }
}
