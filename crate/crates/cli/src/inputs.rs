//! Resolving matrix and start-vector arguments.
//!
//! A matrix argument is a built-in game name (`rps`, `pennies`, `shapley3`,
//! `shapley6`) or a file path. A vector argument is `uniform`, `random`
//! (seeded), a file holding one comma-separated line, or the line itself.

use std::path::Path;

use fpboost::games::builtin;
use fpboost::io::{parse_vector_csv, read_matrix};
use fpboost::rng::{random_strategy, unit_draws};
use fpboost::{Matrix, Strategy};

use crate::error::{CliError, CliResult};

pub fn load_matrix(arg: &str) -> CliResult<Matrix> {
    if let Some(m) = builtin::by_name(arg) {
        return Ok(m);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(CliError::input(format!(
            "{arg}: no such file (built-in games: {})",
            builtin::NAMES.join(", ")
        )));
    }
    Ok(read_matrix(path)?)
}

fn explicit_values(arg: &str) -> CliResult<Vec<f64>> {
    let path = Path::new(arg);
    let text = if path.is_file() { std::fs::read_to_string(path)? } else { arg.to_string() };
    parse_vector_csv(&text).map_err(|e| {
        if path.is_file() {
            CliError::from(e)
        } else {
            CliError::input(format!("{arg}: neither a file nor a comma-separated vector"))
        }
    })
}

/// Start vector for the power method; any nonzero vector is allowed.
pub fn load_vector(arg: &str, n: usize, seed: u64) -> CliResult<Vec<f64>> {
    let v = match arg {
        "uniform" => vec![1.0 / n as f64; n],
        "random" => unit_draws(n, seed),
        _ => explicit_values(arg)?,
    };
    if v.len() != n {
        return Err(CliError::input(format!("vector has {} entries, expected {n}", v.len())));
    }
    Ok(v)
}

/// Mixed strategy; explicit values must already sum to one.
pub fn load_strategy(arg: &str, n: usize, seed: u64) -> CliResult<Strategy> {
    match arg {
        "uniform" => Ok(Strategy::uniform(n)),
        "random" => Ok(random_strategy(n, seed)),
        _ => {
            let v = explicit_values(arg)?;
            if v.len() != n {
                return Err(CliError::input(format!("strategy has {} entries, expected {n}", v.len())));
            }
            Ok(Strategy::new(v)?)
        }
    }
}
