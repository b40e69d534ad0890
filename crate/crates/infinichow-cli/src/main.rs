//! Batch driver for the infinichow library.
//!
//! Reads one JSON computation request — from `--input PATH` or standard
//! input — dispatches it through [`infinichow::run_request`], and writes the
//! JSON response to standard output. The positional `command` and the
//! `--t-prec`/`--s-window`/`--seed` flags override the corresponding
//! envelope fields of the request, so a fixture file can be replayed under
//! different parameters without editing it.
//!
//! Exit codes: 0 on success, 1 on a computation (domain) error, 2 when the
//! request cannot be parsed or names an unknown command or suite.

use std::io::Read;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "infinichow",
    version,
    about = "Exact computations with the infinitesimal Chow dilogarithm",
    after_help = "The request is a JSON object; see docs/schema.md for the full \
                  schema and fixtures/cycle_445.json for a worked example. When \
                  no --input is given the request is read from standard input."
)]
struct Cli {
    /// Command to run (li2, five-term, ell, omega, residue, rho-p1,
    /// rho-cycle, faces, reciprocity-check, invariant-suite); overrides the
    /// request's "command" field
    command: Option<String>,

    /// Path to the JSON request file (defaults to standard input)
    #[arg(long, value_name = "PATH")]
    input: Option<std::path::PathBuf>,

    /// Override the request's t-precision N (coefficients mod t^N)
    #[arg(long, value_name = "N")]
    t_prec: Option<u64>,

    /// Override the request's s-adic working window
    #[arg(long, value_name = "M")]
    s_window: Option<u64>,

    /// Override the request's seed for randomized suites
    #[arg(long, value_name = "S")]
    seed: Option<u64>,

    /// Pretty-print the response
    #[arg(long)]
    pretty: bool,
}

fn input_error(message: String) -> Value {
    json!({
        "status": "error",
        "error": { "code": "parse-error", "message": message }
    })
}

fn respond(response: &Value, pretty: bool) -> ExitCode {
    let text = if pretty {
        serde_json::to_string_pretty(response)
    } else {
        serde_json::to_string(response)
    }
    .expect("responses are always serializable");
    println!("{text}");
    ExitCode::from(u8::try_from(infinichow::exit_code(response)).unwrap_or(1))
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let text = match &cli.input {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) => {
                let resp = input_error(format!("cannot read {}: {e}", path.display()));
                return respond(&resp, cli.pretty);
            }
        },
        None => {
            let mut buf = String::new();
            if let Err(e) = std::io::stdin().read_to_string(&mut buf) {
                let resp = input_error(format!("cannot read standard input: {e}"));
                return respond(&resp, cli.pretty);
            }
            buf
        }
    };

    // apply flag overrides when the request parses; otherwise hand the raw
    // text to the library so the parse error is reported in its words
    let response = match serde_json::from_str::<Value>(&text) {
        Ok(mut request) => {
            if let Some(obj) = request.as_object_mut() {
                if let Some(command) = &cli.command {
                    obj.insert("command".to_string(), json!(command));
                }
                if let Some(n) = cli.t_prec {
                    obj.insert("t_prec".to_string(), json!(n));
                }
                if let Some(m) = cli.s_window {
                    obj.insert("s_window".to_string(), json!(m));
                }
                if let Some(s) = cli.seed {
                    obj.insert("seed".to_string(), json!(s));
                }
            }
            infinichow::run_request(&request)
        }
        Err(_) => infinichow::run_request_str(&text).0,
    };
    respond(&response, cli.pretty)
}
