//! CSV ingestion with line-numbered diagnostics.

use std::path::Path;

use banach_rep::{Matrix64, Vector64};

use crate::error::{CliError, CliResult};

/// Numeric table read from a CSV file with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

type Records = (Vec<String>, Vec<(u64, Vec<String>)>);

fn parse_records(path: &Path, has_header: bool) -> CliResult<Records> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(path, e))?;
    let mut header = Vec::new();
    let mut records = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Input {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(i as u64 + 1, |p| p.line());
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.len() == 1 && fields[0].is_empty() {
            continue;
        }
        if i == 0 && has_header {
            header = fields;
        } else {
            records.push((line, fields));
        }
    }
    Ok((header, records))
}

fn parse_row(path: &Path, line: u64, fields: &[String], width: usize) -> CliResult<Vec<f64>> {
    if fields.len() != width {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            line,
            message: format!("expected {width} fields, found {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| CliError::Input {
                path: path.to_path_buf(),
                line,
                message: format!("cannot parse {f:?} as a finite number"),
            })
        })
        .collect()
}

/// Reads a CSV file whose first row is a header.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let (header, records) = parse_records(path, true)?;
    if header.is_empty() {
        return Err(CliError::Input {
            path: path.to_path_buf(),
            line: 1,
            message: "missing header row".into(),
        });
    }
    let rows = records
        .iter()
        .map(|(line, f)| parse_row(path, *line, f, header.len()))
        .collect::<CliResult<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(CliError::io(path, "no data rows"));
    }
    Ok(Table {
        header: header.clone(),
        rows,
    })
}

/// Regression data: every column except `y` is a coordinate of the input point.
#[derive(Debug, Clone, PartialEq)]
pub struct Regression {
    pub points: Vec<Vector64>,
    pub y: Vector64,
}

pub fn read_regression(path: &Path) -> CliResult<Regression> {
    let table = read_table(path)?;
    let yi = table
        .header
        .iter()
        .position(|h| h.eq_ignore_ascii_case("y"))
        .ok_or_else(|| CliError::io(path, format!("header {:?} has no 'y' column", table.header)))?;
    let points = table
        .rows
        .iter()
        .map(|r| {
            Vector64::from_iterator(
                r.len() - 1,
                r.iter().enumerate().filter(|(i, _)| *i != yi).map(|(_, v)| *v),
            )
        })
        .collect();
    let y = Vector64::from_iterator(table.rows.len(), table.rows.iter().map(|r| r[yi]));
    Ok(Regression { points, y })
}

/// Observation vector: the `y` column (or the only column) of a CSV with header.
pub fn read_observations(path: &Path) -> CliResult<Vector64> {
    let table = read_table(path)?;
    let col = if table.header.len() == 1 {
        0
    } else {
        table
            .header
            .iter()
            .position(|h| h.eq_ignore_ascii_case("y"))
            .ok_or_else(|| CliError::io(path, format!("header {:?} has no 'y' column", table.header)))?
    };
    Ok(Vector64::from_iterator(table.rows.len(), table.rows.iter().map(|r| r[col])))
}

/// Dense matrix from CSV; a leading non-numeric row is treated as a header.
pub fn read_matrix(path: &Path) -> CliResult<Matrix64> {
    let (_, mut records) = parse_records(path, false)?;
    if let Some((_, first)) = records.first() {
        if first.iter().any(|f| f.parse::<f64>().is_err()) {
            records.remove(0);
        }
    }
    let Some((_, first)) = records.first() else {
        return Err(CliError::io(path, "empty matrix"));
    };
    let width = first.len();
    let rows = records
        .iter()
        .map(|(line, f)| parse_row(path, *line, f, width))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Matrix64::from_fn(rows.len(), width, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn regression_table() {
        let f = file("x1,x2,y\n0,1,2\n3,4,5\n");
        let r = read_regression(f.path()).unwrap();
        assert_eq!(r.points[1], Vector64::from_vec(vec![3.0, 4.0]));
        assert_eq!(r.y, Vector64::from_vec(vec![2.0, 5.0]));
    }

    #[test]
    fn wrong_arity_names_line() {
        let f = file("x1,y\n0,1\n2\n3,4\n");
        let err = read_regression(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }

    #[test]
    fn garbage_names_line() {
        let f = file("x1,y\n0,1\n2,abc\n");
        let err = read_regression(f.path()).unwrap_err();
        assert!(err.to_string().contains("line 3") && err.to_string().contains("abc"), "{err}");
    }

    #[test]
    fn matrix_with_and_without_header() {
        let a = read_matrix(file("1,2\n3,4\n").path()).unwrap();
        let b = read_matrix(file("c1,c2\n1,2\n3,4\n").path()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[(1, 0)], 3.0);
    }
}
