//! SDPA sparse (`.dat-s`) reader and writer.
//!
//! Layout: constraint count `m`, block count, block sizes (negative for
//! diagonal blocks), the `m` right-hand sides, then `matno blkno i j value`
//! lines (1-based, upper triangle).
//!
//! SDPA files describe the pair
//!
//! ```text
//! (P) min  sum_k c_k x_k   s.t.  sum_k x_k F_k - F_0 ⪰ 0
//! (D) max  <F_0, Y>        s.t.  <F_k, Y> = c_k,  Y ⪰ 0
//! ```
//!
//! An [`SdpModel`] `min <C, X> s.t. <A_k, X> = b_k` is written as
//! `F_0 = -C`, `F_k = A_k`, `c = b`, so SDPA-family solvers report
//! `-<C, X*>` as their optimum. Relaxation models are built so that this
//! number is the moment bound itself (minus the objective's constant
//! term, which is recorded in a leading comment).

use std::fmt::Write as _;

use super::model::{BlockKind, BlockSparse, BlockSpec, LinearConstraint, SdpModel, Sense};
use super::SdpError;

/// Writes `model` in SDPA sparse format. Inequalities are converted to
/// equalities with a diagonal slack block first.
pub fn export_sdpa(model: &SdpModel) -> String {
    export_sdpa_with_comments(model, &[])
}

/// Like [`export_sdpa`], with `*`-prefixed comment lines at the top.
pub fn export_sdpa_with_comments(model: &SdpModel, comments: &[String]) -> String {
    let model = model.to_equality_form();
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(out, "* {line}");
        }
    }
    let _ = writeln!(out, "{}", model.constraints.len());
    let _ = writeln!(out, "{}", model.blocks.len());
    let sizes: Vec<String> = model
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Dense => format!("{}", b.size),
            BlockKind::Diagonal => format!("-{}", b.size),
        })
        .collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = model.constraints.iter().map(|c| fmt_f64(c.rhs)).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));
    let write_matrix = |out: &mut String, matno: usize, m: &BlockSparse, sign: f64| {
        let m = m.clone().canonical();
        for e in m.entries() {
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                matno,
                e.block + 1,
                e.row + 1,
                e.col + 1,
                fmt_f64(sign * e.value)
            );
        }
    };
    write_matrix(&mut out, 0, &model.cost, -1.0);
    for (k, c) in model.constraints.iter().enumerate() {
        write_matrix(&mut out, k + 1, &c.matrix, 1.0);
    }
    out
}

/// Shortest representation that parses back to the identical `f64`.
fn fmt_f64(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:?}")
}

struct TokenStream<'a> {
    tokens: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl<'a> TokenStream<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str), SdpError> {
        let t = self.tokens.get(self.pos).copied().ok_or_else(|| SdpError::Sdpa {
            line: self.last_line,
            message: format!("unexpected end of file, expected {what}"),
        })?;
        self.pos += 1;
        Ok(t)
    }
}

fn parse_int(line: usize, tok: &str, what: &str) -> Result<i64, SdpError> {
    let v: f64 = tok.parse().map_err(|_| SdpError::Sdpa {
        line,
        message: format!("expected {what}, found `{tok}`"),
    })?;
    if v.fract() != 0.0 {
        return Err(SdpError::Sdpa {
            line,
            message: format!("expected integer {what}, found `{tok}`"),
        });
    }
    Ok(v as i64)
}

fn parse_f64(line: usize, tok: &str, what: &str) -> Result<f64, SdpError> {
    let v: f64 = tok.parse().map_err(|_| SdpError::Sdpa {
        line,
        message: format!("expected {what}, found `{tok}`"),
    })?;
    if !v.is_finite() {
        return Err(SdpError::Sdpa {
            line,
            message: format!("non-finite {what}"),
        });
    }
    Ok(v)
}

/// Reads SDPA sparse text. Leading lines starting with `*` or `"` are
/// comments; `{ } ( ) ,` in the header are treated as separators.
pub fn import_sdpa(text: &str) -> Result<SdpModel, SdpError> {
    let mut header: Vec<(usize, &str)> = Vec::new();
    let mut body_lines: Vec<(usize, &str)> = Vec::new();
    let mut header_done = false;
    let mut needed: Option<usize> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('*') || trimmed.starts_with('"') {
            continue;
        }
        if header_done {
            body_lines.push((line, trimmed));
            continue;
        }
        for tok in trimmed
            .split(|c: char| c.is_whitespace() || "{}(),".contains(c))
            .filter(|t| !t.is_empty())
        {
            header.push((line, tok));
        }
        // m, nblocks, sizes, rhs
        if needed.is_none() && header.len() >= 2 {
            let m = parse_int(header[0].0, header[0].1, "constraint count")?;
            let nb = parse_int(header[1].0, header[1].1, "block count")?;
            if m < 0 {
                return Err(SdpError::Sdpa {
                    line: header[0].0,
                    message: "negative constraint count".into(),
                });
            }
            if nb <= 0 {
                return Err(SdpError::Sdpa {
                    line: header[1].0,
                    message: "block count must be positive".into(),
                });
            }
            needed = Some(2 + nb as usize + m as usize);
        }
        if let Some(n) = needed {
            if header.len() >= n {
                if header.len() > n {
                    return Err(SdpError::Sdpa {
                        line,
                        message: "header has trailing values".into(),
                    });
                }
                header_done = true;
            }
        }
    }
    if header.is_empty() {
        return Err(SdpError::Sdpa {
            line: last_line.max(1),
            message: "empty input".into(),
        });
    }
    let mut ts = TokenStream {
        tokens: header,
        pos: 0,
        last_line,
    };
    let (l, t) = ts.next("constraint count")?;
    let m = parse_int(l, t, "constraint count")? as usize;
    let (l, t) = ts.next("block count")?;
    let nb = parse_int(l, t, "block count")?;
    if nb <= 0 {
        return Err(SdpError::Sdpa {
            line: l,
            message: "block count must be positive".into(),
        });
    }
    let mut blocks = Vec::with_capacity(nb as usize);
    for _ in 0..nb {
        let (l, t) = ts.next("block size")?;
        let s = parse_int(l, t, "block size")?;
        if s == 0 {
            return Err(SdpError::Sdpa {
                line: l,
                message: "block size 0".into(),
            });
        }
        blocks.push(if s > 0 {
            BlockSpec::dense(s as usize)
        } else {
            BlockSpec::diagonal(s.unsigned_abs() as usize)
        });
    }
    let mut rhs = Vec::with_capacity(m);
    for _ in 0..m {
        let (l, t) = ts.next("right-hand side")?;
        rhs.push(parse_f64(l, t, "right-hand side")?);
    }

    let mut cost = BlockSparse::new();
    let mut mats: Vec<BlockSparse> = vec![BlockSparse::new(); m];
    for (line, text) in body_lines {
        let toks: Vec<&str> = text.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(SdpError::Sdpa {
                line,
                message: format!("expected `matno blkno i j value`, found {} fields", toks.len()),
            });
        }
        let matno = parse_int(line, toks[0], "matrix number")?;
        let blk = parse_int(line, toks[1], "block number")?;
        let i = parse_int(line, toks[2], "row")?;
        let j = parse_int(line, toks[3], "column")?;
        let v = parse_f64(line, toks[4], "value")?;
        if matno < 0 || matno as usize > m {
            return Err(SdpError::Sdpa {
                line,
                message: format!("matrix number {matno} out of range 0..={m}"),
            });
        }
        if blk < 1 || blk as usize > blocks.len() {
            return Err(SdpError::Sdpa {
                line,
                message: format!("block number {blk} out of range"),
            });
        }
        let spec = blocks[blk as usize - 1];
        if i < 1 || j < 1 || i as usize > spec.size || j as usize > spec.size {
            return Err(SdpError::Sdpa {
                line,
                message: format!("entry ({i}, {j}) outside block {blk} of size {}", spec.size),
            });
        }
        if spec.kind == BlockKind::Diagonal && i != j {
            return Err(SdpError::Sdpa {
                line,
                message: format!("off-diagonal entry in diagonal block {blk}"),
            });
        }
        let (b, r, c) = (blk as usize - 1, i as usize - 1, j as usize - 1);
        if matno == 0 {
            cost.add(b, r, c, -v);
        } else {
            mats[matno as usize - 1].add(b, r, c, v);
        }
    }
    let model = SdpModel {
        blocks,
        cost: cost.canonical(),
        constraints: mats
            .into_iter()
            .zip(rhs)
            .map(|(matrix, rhs)| LinearConstraint {
                matrix: matrix.canonical(),
                sense: Sense::Eq,
                rhs,
            })
            .collect(),
    };
    model.validate()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SdpModel {
        let mut model = SdpModel::new(vec![BlockSpec::dense(1)]);
        model.cost.add(0, 0, 0, 1.0);
        let mut a = BlockSparse::new();
        a.add(0, 0, 0, 1.0);
        model.constraints.push(LinearConstraint {
            matrix: a,
            sense: Sense::Eq,
            rhs: 1.0,
        });
        model
    }

    #[test]
    fn smallest_model_text() {
        assert_eq!(export_sdpa(&tiny()), "1\n1\n1\n1.0\n0 1 1 1 -1.0\n1 1 1 1 1.0\n");
    }

    #[test]
    fn round_trip_is_structural() {
        let mut model = SdpModel::new(vec![BlockSpec::dense(3), BlockSpec::diagonal(2)]);
        model.cost.add(0, 0, 2, 0.1);
        model.cost.add(1, 1, 1, -3.25e-7);
        let mut a = BlockSparse::new();
        a.add(0, 1, 1, 1.0 / 3.0);
        a.add(1, 0, 0, 2.0);
        model.constraints.push(LinearConstraint {
            matrix: a.canonical(),
            sense: Sense::Eq,
            rhs: std::f64::consts::PI,
        });
        let back = import_sdpa(&export_sdpa(&model)).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn tolerant_header() {
        let text = "\"a comment\n* another\n1 =mdim\n2 =nblocks\n{2, -1}\n{1.0}\n0 1 1 2 1\n1 2 1 1 1\n";
        let err = import_sdpa(text).unwrap_err();
        // `=mdim` annotations are not numbers
        assert!(matches!(err, SdpError::Sdpa { line: 3, .. }));
        let text = "\"a comment\n* another\n1\n2\n{2, -1}\n{1.0}\n0 1 1 2 1\n1 2 1 1 1\n";
        let model = import_sdpa(text).unwrap();
        assert_eq!(model.blocks, vec![BlockSpec::dense(2), BlockSpec::diagonal(1)]);
        assert_eq!(model.cost.entries()[0].value, -1.0);
    }

    #[test]
    fn malformed_inputs_are_located() {
        assert!(matches!(import_sdpa(""), Err(SdpError::Sdpa { .. })));
        assert!(matches!(
            import_sdpa("1\n0\n"),
            Err(SdpError::Sdpa { line: 2, .. })
        ));
        assert!(matches!(
            import_sdpa("1\n1\n2\n1.0\n0 1 3 1 1.0\n"),
            Err(SdpError::Sdpa { line: 5, .. })
        ));
        assert!(matches!(
            import_sdpa("1\n1\n2\n1.0\n0 1 1\n"),
            Err(SdpError::Sdpa { line: 5, .. })
        ));
        assert!(matches!(
            import_sdpa("1\n1\n2\n"),
            Err(SdpError::Sdpa { .. })
        ));
    }

    #[test]
    fn inequalities_gain_slack_block() {
        let mut model = tiny();
        model.constraints[0].sense = Sense::Ge;
        let text = export_sdpa(&model);
        assert!(text.starts_with("1\n2\n1 -1\n"));
    }
}
