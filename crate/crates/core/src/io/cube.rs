//! Adobe/Iridas `.cube` text format.
//!
//! Supported subset: optional `TITLE`, required `LUT_3D_SIZE`, optional
//! `DOMAIN_MIN`/`DOMAIN_MAX`, `#` comments and blank lines, then size³
//! whitespace-separated float triplets in red-fastest order. Domains other
//! than [0,1] are remapped linearly; out-of-range values are clamped and
//! counted rather than rejected.

use std::io::BufRead;

use crate::error::{Error, Result};
use crate::lut::Lut3d;

/// Parse result: the LUT plus how many components had to be clamped.
#[derive(Debug)]
pub struct ParsedCube {
    pub lut: Lut3d,
    pub title: Option<String>,
    /// Number of components clamped into [0,1].
    pub clamped: usize,
}

fn parse_triplet(line: &str, line_no: usize) -> Result<[f64; 3]> {
    let mut out = [0.0f64; 3];
    let mut it = line.split_whitespace();
    for slot in &mut out {
        let tok = it.next().ok_or(Error::Parse {
            line: line_no,
            message: "expected three numeric components".into(),
        })?;
        *slot = tok.parse::<f64>().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("non-numeric token {tok:?}"),
        })?;
    }
    if it.next().is_some() {
        return Err(Error::Parse {
            line: line_no,
            message: "more than three components on data line".into(),
        });
    }
    Ok(out)
}

/// Parse a `.cube` stream into a [0,1]-domain LUT.
pub fn parse_cube<R: BufRead>(reader: R) -> Result<ParsedCube> {
    let mut title = None;
    let mut size: Option<usize> = None;
    let mut domain_min = [0.0f64; 3];
    let mut domain_max = [1.0f64; 3];
    let mut entries: Vec<f64> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: format!("read failure: {e}"),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("TITLE") {
            title = Some(rest.trim().trim_matches('"').to_string());
            continue;
        }
        if trimmed.starts_with("LUT_1D_SIZE") {
            return Err(Error::UnsupportedVariant(
                "LUT_1D_SIZE: 1D LUTs are not supported".into(),
            ));
        }
        if let Some(rest) = trimmed.strip_prefix("LUT_3D_SIZE") {
            let n = rest.trim().parse::<usize>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid LUT_3D_SIZE {:?}", rest.trim()),
            })?;
            if n < 2 {
                return Err(Error::InvalidResolution(n));
            }
            size = Some(n);
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("DOMAIN_MIN") {
            domain_min = parse_triplet(rest, line_no)?;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("DOMAIN_MAX") {
            domain_max = parse_triplet(rest, line_no)?;
            continue;
        }
        if trimmed.starts_with(|c: char| c.is_ascii_alphabetic()) {
            // unknown keyword lines are tolerated before data
            if entries.is_empty() {
                continue;
            }
            return Err(Error::Parse {
                line: line_no,
                message: format!("unexpected keyword inside data: {trimmed:?}"),
            });
        }
        entries.extend_from_slice(&parse_triplet(trimmed, line_no)?);
    }

    let size = size.ok_or_else(|| Error::Format("missing LUT_3D_SIZE".into()))?;
    let expected = 3 * size * size * size;
    if entries.len() != expected {
        return Err(Error::Truncated {
            expected: expected / 3,
            found: entries.len() / 3,
        });
    }
    for c in 0..3 {
        if domain_min[c] >= domain_max[c] {
            return Err(Error::Format(format!(
                "DOMAIN_MIN {} must be below DOMAIN_MAX {} (channel {c})",
                domain_min[c], domain_max[c]
            )));
        }
    }

    let mut clamped = 0usize;
    let data: Vec<f32> = entries
        .chunks_exact(3)
        .flat_map(|t| {
            (0..3).map(move |c| {
                let v = (t[c] - domain_min[c]) / (domain_max[c] - domain_min[c]);
                if !(0.0..=1.0).contains(&v) {
                    (v.clamp(0.0, 1.0), true)
                } else {
                    (v, false)
                }
            })
        })
        .map(|(v, was_clamped)| {
            if was_clamped {
                clamped += 1;
            }
            v as f32
        })
        .collect();

    Ok(ParsedCube {
        lut: Lut3d::from_data(size, data)?,
        title,
        clamped,
    })
}

/// Serialize a LUT as `.cube` text with the given number of decimal places.
pub fn write_cube(lut: &Lut3d, precision: usize) -> String {
    let mut out = String::new();
    write_cube_to(&mut out, lut, precision, None);
    out
}

pub fn write_cube_to(out: &mut String, lut: &Lut3d, precision: usize, title: Option<&str>) {
    use std::fmt::Write;
    if let Some(t) = title {
        writeln!(out, "TITLE \"{t}\"").unwrap();
    }
    writeln!(out, "LUT_3D_SIZE {}", lut.resolution()).unwrap();
    writeln!(out, "DOMAIN_MIN 0.0 0.0 0.0").unwrap();
    writeln!(out, "DOMAIN_MAX 1.0 1.0 1.0").unwrap();
    for t in lut.data().chunks_exact(3) {
        writeln!(
            out,
            "{:.p$} {:.p$} {:.p$}",
            t[0],
            t[1],
            t[2],
            p = precision
        )
        .unwrap();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lut::test_support::random_lut;

    const MINIMAL_IDENTITY_2: &str = "\
# a minimal cube
LUT_3D_SIZE 2

0 0 0
1 0 0
0 1 0
1 1 0
0 0 1
1 0 1
0 1 1
1 1 1
";

    #[test]
    fn parses_minimal_identity() {
        let parsed = parse_cube(MINIMAL_IDENTITY_2.as_bytes()).unwrap();
        assert_eq!(parsed.lut, Lut3d::identity(2).unwrap());
        assert_eq!(parsed.clamped, 0);
    }

    #[test]
    fn comments_are_transparent() {
        let commented = "\
# header comment
LUT_3D_SIZE 2
# after size
0 0 0
1 0 0
# interleaved comment
0 1 0
1 1 0
0 0 1
1 0 1
0 1 1

1 1 1
";
        let a = parse_cube(MINIMAL_IDENTITY_2.as_bytes()).unwrap();
        let b = parse_cube(commented.as_bytes()).unwrap();
        assert_eq!(a.lut, b.lut);
    }

    #[test]
    fn red_axis_is_fastest() {
        // second data line is vertex (r=1, g=0, b=0)
        let parsed = parse_cube(MINIMAL_IDENTITY_2.as_bytes()).unwrap();
        assert_eq!(parsed.lut.vertex(1, 0, 0), [1.0, 0.0, 0.0]);
        assert_eq!(parsed.lut.vertex(0, 0, 1), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn title_and_domain_remap() {
        let text = "\
TITLE \"warm vendor look\"
LUT_3D_SIZE 2
DOMAIN_MIN -1 -1 -1
DOMAIN_MAX 3 3 3
-1 -1 -1
3 -1 -1
-1 3 -1
3 3 -1
-1 -1 3
3 -1 3
-1 3 3
3 3 3
";
        let parsed = parse_cube(text.as_bytes()).unwrap();
        assert_eq!(parsed.title.as_deref(), Some("warm vendor look"));
        assert_eq!(parsed.lut, Lut3d::identity(2).unwrap());
    }

    #[test]
    fn out_of_range_values_clamp_with_counter() {
        let text = "\
LUT_3D_SIZE 2
-0.25 0 0
1.5 0 0
0 1 0
1 1 0
0 0 1
1 0 1
0 1 1
1 1 1
";
        let parsed = parse_cube(text.as_bytes()).unwrap();
        assert_eq!(parsed.clamped, 2);
        assert_eq!(parsed.lut.vertex(0, 0, 0), [0.0, 0.0, 0.0]);
        assert_eq!(parsed.lut.vertex(1, 0, 0), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn typed_errors_for_malformed_inputs() {
        let no_size = "0 0 0\n1 1 1\n";
        assert!(matches!(
            parse_cube(no_size.as_bytes()),
            Err(Error::Format(_))
        ));

        let truncated = "LUT_3D_SIZE 2\n0 0 0\n1 0 0\n";
        assert!(matches!(
            parse_cube(truncated.as_bytes()),
            Err(Error::Truncated { expected: 8, found: 2 })
        ));

        let bad_token = "LUT_3D_SIZE 2\n0 0 0\n1 zero 0\n";
        match parse_cube(bad_token.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }

        let one_d = "LUT_1D_SIZE 4\n0\n0.33\n0.66\n1\n";
        assert!(matches!(
            parse_cube(one_d.as_bytes()),
            Err(Error::UnsupportedVariant(_))
        ));

        let bad_domain = "LUT_3D_SIZE 2\nDOMAIN_MIN 1 1 1\nDOMAIN_MAX 0 0 0\n";
        assert!(matches!(parse_cube(bad_domain.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn identity_2_writes_exactly_8_data_lines() {
        let text = write_cube(&Lut3d::identity(2).unwrap(), 6);
        let data_lines = text
            .lines()
            .filter(|l| l.starts_with(|c: char| c.is_ascii_digit()))
            .count();
        assert_eq!(data_lines, 8);
    }

    #[test]
    fn round_trip_precision_6() {
        let lut = random_lut(77, 9);
        let parsed = parse_cube(write_cube(&lut, 6).as_bytes()).unwrap();
        let max_dev = lut
            .data()
            .iter()
            .zip(parsed.lut.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_dev < 1e-6, "max deviation {max_dev}");
    }

    #[test]
    fn round_trip_precision_2_quantization_bound() {
        let lut = random_lut(78, 5);
        let parsed = parse_cube(write_cube(&lut, 2).as_bytes()).unwrap();
        let max_dev = lut
            .data()
            .iter()
            .zip(parsed.lut.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_dev <= 0.005 + 1e-7, "max deviation {max_dev}");
    }
}
