#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_banach-rep"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

pub fn s(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Samples of a smooth signal plus a step, `x1,y` columns.
pub fn regression_csv(m: usize) -> String {
    let mut out = String::from("x1,y\n");
    for i in 0..m {
        let x = i as f64 / (m - 1) as f64;
        let y = (3.0 * x).sin() + if x > 0.5 { 1.0 } else { 0.0 } + 0.05 * ((7 * i) % 5) as f64;
        writeln!(out, "{x},{y}").unwrap();
    }
    out
}

/// Deterministic pseudo-random `rows × cols` matrix without header.
pub fn matrix_csv(rows: usize, cols: usize, salt: u64) -> String {
    let mut out = String::new();
    let mut state = 0x2545_F491_4F6C_DD1D_u64 ^ salt;
    for _ in 0..rows {
        let row: Vec<String> = (0..cols)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                format!("{}", (state % 2001) as f64 / 1000.0 - 1.0)
            })
            .collect();
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    out
}

pub fn observations_csv(values: &[f64]) -> String {
    let mut out = String::from("y\n");
    for v in values {
        writeln!(out, "{v}").unwrap();
    }
    out
}

pub fn read_grid(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}
