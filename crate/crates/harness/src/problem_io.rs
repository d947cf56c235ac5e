//! Plain-text problem files.
//!
//! ```text
//! logreg <n> <m> <mu>
//! <m rows of n numbers>
//! <m labels, one per line>
//! ```
//!
//! ```text
//! quadratic <n> <mu> <L> <c>
//! <n rows of A>
//! <b on one line>
//! ```
//!
//! Numbers use the shortest representation that reads back to the same `f64`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use ellipcenters::linalg::Matrix;
use ellipcenters::{LogRegProblem, Problem, QuadraticProblem};

use crate::error::{HarnessError, Result};

fn push_row(out: &mut String, row: &[f64]) {
    for (j, v) in row.iter().enumerate() {
        if j > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:e}");
    }
    out.push('\n');
}

/// Serializes a problem instance.
pub fn problem_to_string(p: &Problem) -> String {
    let mut s = String::new();
    match p {
        Problem::LogReg(lr) => {
            let a = lr.data();
            let _ = writeln!(
                s,
                "logreg {} {} {:e}",
                a.cols(),
                a.rows(),
                ellipcenters::Objective::mu(lr)
            );
            for i in 0..a.rows() {
                push_row(&mut s, a.row(i));
            }
            for b in lr.labels() {
                let _ = writeln!(s, "{b:e}");
            }
        }
        Problem::Quadratic(q) => {
            use ellipcenters::Objective;
            let a = q.a();
            let _ = writeln!(
                s,
                "quadratic {} {:e} {:e} {:e}",
                a.rows(),
                q.mu(),
                q.lip(),
                q.c()
            );
            for i in 0..a.rows() {
                push_row(&mut s, a.row(i));
            }
            push_row(&mut s, q.b());
        }
    }
    s
}

pub fn write_problem<W: Write>(mut w: W, p: &Problem) -> std::io::Result<()> {
    w.write_all(problem_to_string(p).as_bytes())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        loop {
            self.line += 1;
            match self.inner.next() {
                None => return Err(self.err("unexpected end of file")),
                Some(Err(e)) => return Err(self.err(&e.to_string())),
                Some(Ok(l)) if l.trim().is_empty() => continue,
                Some(Ok(l)) => return Ok(l),
            }
        }
    }

    fn numbers(&mut self, expect: usize) -> Result<Vec<f64>> {
        let l = self.next_line()?;
        let v = l
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| self.err(&format!("bad number {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if v.len() != expect {
            return Err(self.err(&format!("expected {expect} numbers, found {}", v.len())));
        }
        Ok(v)
    }

    fn err(&self, msg: &str) -> HarnessError {
        HarnessError::Parse {
            line: self.line,
            msg: msg.to_string(),
        }
    }
}

fn parse_field<T: std::str::FromStr>(tok: Option<&str>, what: &str, line: usize) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| HarnessError::Parse {
            line,
            msg: format!("missing or invalid {what}"),
        })
}

/// Parses a problem file.
pub fn read_problem<R: BufRead>(r: R) -> Result<Problem> {
    let mut lines = Lines {
        inner: r.lines(),
        line: 0,
    };
    let header = lines.next_line()?;
    let line = lines.line;
    let mut tok = header.split_whitespace();
    match tok.next() {
        Some("logreg") => {
            let n: usize = parse_field(tok.next(), "n", line)?;
            let m: usize = parse_field(tok.next(), "m", line)?;
            let mu: f64 = parse_field(tok.next(), "mu", line)?;
            let mut data = Vec::with_capacity(n * m);
            for _ in 0..m {
                data.extend(lines.numbers(n)?);
            }
            let mut labels = Vec::with_capacity(m);
            for _ in 0..m {
                labels.push(lines.numbers(1)?[0]);
            }
            let data = Matrix::from_row_major(m, n, data)?;
            Ok(Problem::LogReg(LogRegProblem::new(data, labels, mu)?))
        }
        Some("quadratic") => {
            let n: usize = parse_field(tok.next(), "n", line)?;
            let mu: f64 = parse_field(tok.next(), "mu", line)?;
            let lip: f64 = parse_field(tok.next(), "L", line)?;
            let c: f64 = parse_field(tok.next(), "c", line)?;
            let mut a = Vec::with_capacity(n * n);
            for _ in 0..n {
                a.extend(lines.numbers(n)?);
            }
            let b = lines.numbers(n)?;
            let a = Matrix::from_row_major(n, n, a)?;
            Ok(Problem::Quadratic(QuadraticProblem::with_constants(
                a, b, c, mu, lip,
            )?))
        }
        _ => Err(HarnessError::Parse {
            line,
            msg: "expected `logreg` or `quadratic` header".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ellipcenters::objectives::generate_logreg;
    use ellipcenters::Objective;

    #[test]
    fn logreg_round_trip_is_exact() {
        let p = Problem::LogReg(generate_logreg(7, 4, 30.0, 3).unwrap());
        let s = problem_to_string(&p);
        let q = read_problem(s.as_bytes()).unwrap();
        assert_eq!(problem_to_string(&q), s);
        let x = [0.3; 7];
        assert_eq!(p.value(&x), q.value(&x));
        assert_eq!(p.lip(), q.lip());
    }

    #[test]
    fn quadratic_round_trip_is_exact() {
        let p = Problem::Quadratic(QuadraticProblem::random_spd(5, 10.0, 2).unwrap());
        let s = problem_to_string(&p);
        let q = read_problem(s.as_bytes()).unwrap();
        assert_eq!(problem_to_string(&q), s);
        assert_eq!(p.mu(), q.mu());
    }

    #[test]
    fn malformed_files_report_the_line() {
        let err = read_problem("logreg 2 1 0.5\n1 2\nx\n".as_bytes()).unwrap_err();
        assert!(matches!(err, HarnessError::Parse { line: 3, .. }), "{err}");
        assert!(read_problem("cubic 3\n".as_bytes()).is_err());
        assert!(read_problem("logreg 2 1 0.5\n1 2 3\n1\n".as_bytes()).is_err());
        assert!(read_problem("logreg 2 1 0.5\n1 2\n0.5\n".as_bytes()).is_err());
    }
}
