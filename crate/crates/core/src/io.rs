//! The on-disk puzzle format.
//!
//! Puzzles are JSON objects with the board side `n`, the color count `q`,
//! the `model` slug (`"rot"` or `"fixed"`), and the edge grids: `h` holds
//! `n + 1` rows of `n` colors, `v` holds `n` rows of `n + 1` colors. The
//! encoding is lossless; reading back a written file reproduces the
//! coloring exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Color, EdgeColoring, ModelError, ModelVariant};

#[derive(Debug, Serialize, Deserialize)]
struct PuzzleFile {
    n: usize,
    q: u32,
    /// Kept as text so a bad slug fails with the field name, not a bare
    /// serde variant error.
    model: String,
    h: Vec<Vec<Color>>,
    v: Vec<Vec<Color>>,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid puzzle JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field `{field}`: expected {expected}, found {found}")]
    Shape {
        field: &'static str,
        expected: String,
        found: String,
    },
    #[error("field `{field}`: color {color} is out of range for q = {q}")]
    Color {
        field: &'static str,
        color: Color,
        q: u32,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Serializes a puzzle to its JSON text form.
pub fn puzzle_to_json(coloring: &EdgeColoring, model: ModelVariant) -> String {
    let n = coloring.n();
    let file = PuzzleFile {
        n,
        q: coloring.q(),
        model: model.slug().to_string(),
        h: (0..=n)
            .map(|r| (0..n).map(|c| coloring.h_at(r, c)).collect())
            .collect(),
        v: (0..n)
            .map(|r| (0..=n).map(|c| coloring.v_at(r, c)).collect())
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("puzzle files always serialize");
    text.push('\n');
    text
}

/// Parses a puzzle from JSON text, validating shapes and color ranges.
pub fn puzzle_from_json(text: &str) -> Result<(EdgeColoring, ModelVariant), IoError> {
    let file: PuzzleFile = serde_json::from_str(text)?;
    let model = ModelVariant::from_str(&file.model)?;
    if file.n == 0 {
        return Err(IoError::Shape {
            field: "n",
            expected: "a side of at least 1".into(),
            found: "0".into(),
        });
    }
    if file.q == 0 {
        return Err(IoError::Shape {
            field: "q",
            expected: "at least one color".into(),
            found: "0".into(),
        });
    }
    let n = file.n;
    check_grid("h", &file.h, n + 1, n, file.q)?;
    check_grid("v", &file.v, n, n + 1, file.q)?;
    let h = file.h.into_iter().flatten().collect();
    let v = file.v.into_iter().flatten().collect();
    let coloring = EdgeColoring::from_flat(n, file.q, h, v)?;
    Ok((coloring, model))
}

fn check_grid(
    field: &'static str,
    grid: &[Vec<Color>],
    rows: usize,
    cols: usize,
    q: u32,
) -> Result<(), IoError> {
    if grid.len() != rows {
        return Err(IoError::Shape {
            field,
            expected: format!("{rows} rows"),
            found: format!("{} rows", grid.len()),
        });
    }
    for (i, row) in grid.iter().enumerate() {
        if row.len() != cols {
            return Err(IoError::Shape {
                field,
                expected: format!("{cols} entries per row"),
                found: format!("{} entries in row {i}", row.len()),
            });
        }
        for &color in row {
            if color >= q {
                return Err(IoError::Color { field, color, q });
            }
        }
    }
    Ok(())
}

/// Reads a puzzle file from disk.
pub fn read_puzzle(path: &Path) -> Result<(EdgeColoring, ModelVariant), IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    puzzle_from_json(&text)
}

/// Writes a puzzle file to disk.
pub fn write_puzzle(
    path: &Path,
    coloring: &EdgeColoring,
    model: ModelVariant,
) -> Result<(), IoError> {
    fs::write(path, puzzle_to_json(coloring, model)).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}
