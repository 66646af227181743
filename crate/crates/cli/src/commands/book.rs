//! `book-invert`: impact-versus-volume curves from latent book profiles,
//! one sweep entry per profile exponent.

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;

use impactlab::book::{BookDepth, BookParams};

use crate::config::ExperimentConfig;
use crate::output::Artifacts;

#[derive(Debug, Args)]
pub struct BookArgs {
    /// Impact scale at full capacity.
    #[arg(long)]
    pub y_norm: Option<f64>,
    /// Profile steepness.
    #[arg(long)]
    pub b: Option<f64>,
    /// Profile exponents at the origin; repeat for a sweep.
    #[arg(long = "n", value_name = "N")]
    pub n_values: Vec<f64>,
}

#[derive(Serialize)]
struct BookRow {
    n: f64,
    pi: f64,
    impact: f64,
}

pub fn apply_flags(cfg: &mut ExperimentConfig, args: &BookArgs) {
    let book = &mut cfg.book;
    if let Some(v) = args.y_norm {
        book.y_norm = v;
    }
    if let Some(v) = args.b {
        book.b = v;
    }
    if !args.n_values.is_empty() {
        book.n_values = args.n_values.clone();
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let book = &cfg.book;
    if book.points == 0 {
        bail!("book.points must be at least 1");
    }
    if !(book.max_fill > 0.0 && book.max_fill < 1.0) {
        bail!("book.max_fill must lie in (0, 1); the book empties at capacity");
    }

    let mut rows = Vec::new();
    for &n in &book.n_values {
        let params = BookParams::new(book.y_norm, book.b, n)?;
        let depth = BookDepth::new(&params)?;
        for k in 1..=book.points {
            let pi = book.max_fill * depth.capacity() * k as f64 / book.points as f64;
            rows.push(BookRow { n, pi, impact: depth.invert(pi)? });
        }
    }

    let mut artifacts = Artifacts::new(cfg);
    artifacts.table("book_inversion", &rows)?;
    Ok(artifacts)
}
