//! Token file format: one record per line,
//! `lut_id<TAB>codebook_hash<TAB>64 space-separated indices`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Tokens per LUT (the 4³ latent grid in raster order).
pub const TOKEN_COUNT: usize = 64;

/// One tokenized LUT bound to a codebook version by hash.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenFileRecord {
    pub lut_id: String,
    pub codebook_hash: String,
    pub tokens: Vec<u16>,
}

impl TokenFileRecord {
    pub fn new(lut_id: &str, codebook_hash: &str, tokens: Vec<u16>) -> Result<Self> {
        if tokens.len() != TOKEN_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "token count {} != {TOKEN_COUNT}",
                tokens.len()
            )));
        }
        Ok(TokenFileRecord {
            lut_id: lut_id.to_string(),
            codebook_hash: codebook_hash.to_string(),
            tokens,
        })
    }

    /// Check index bounds against a codebook size and, when given, the
    /// loaded codebook's hash.
    pub fn validate(&self, k: usize, expected_hash: Option<&str>) -> Result<()> {
        if self.tokens.len() != TOKEN_COUNT {
            return Err(Error::ShapeMismatch(format!(
                "token count {} != {TOKEN_COUNT}",
                self.tokens.len()
            )));
        }
        if let Some(&bad) = self.tokens.iter().find(|&&t| t as usize >= k) {
            return Err(Error::TokenOutOfRange {
                index: bad as usize,
                k,
            });
        }
        if let Some(expected) = expected_hash {
            if expected != self.codebook_hash {
                return Err(Error::CodebookHashMismatch {
                    record: self.codebook_hash.clone(),
                    loaded: expected.to_string(),
                });
            }
        }
        Ok(())
    }
}

pub fn write_tokens<W: Write>(mut w: W, records: &[TokenFileRecord]) -> std::io::Result<()> {
    for rec in records {
        let tokens: Vec<String> = rec.tokens.iter().map(|t| t.to_string()).collect();
        writeln!(w, "{}\t{}\t{}", rec.lut_id, rec.codebook_hash, tokens.join(" "))?;
    }
    Ok(())
}

/// Read records, validating token count and bounds against `k`.
pub fn read_tokens<R: BufRead>(r: R, k: usize) -> Result<Vec<TokenFileRecord>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: format!("read failure: {e}"),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.splitn(3, '\t');
        let (lut_id, hash, token_str) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "expected lut_id<TAB>hash<TAB>tokens".into(),
                })
            }
        };
        let tokens = token_str
            .split_whitespace()
            .map(|t| {
                t.parse::<u16>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad token {t:?}"),
                })
            })
            .collect::<Result<Vec<u16>>>()?;
        let rec = TokenFileRecord::new(lut_id, hash, tokens).map_err(|_| Error::Parse {
            line: line_no,
            message: format!("token count != {TOKEN_COUNT}"),
        })?;
        rec.validate(k, None)?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_record_round_trips_byte_identically() {
        let rec = TokenFileRecord::new("id0", "cafebabe", vec![0; 64]).unwrap();
        let mut buf = Vec::new();
        write_tokens(&mut buf, std::slice::from_ref(&rec)).unwrap();
        let mut buf2 = Vec::new();
        write_tokens(&mut buf2, &read_tokens(&buf[..], 256).unwrap()).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn rejects_out_of_range_index() {
        let rec = TokenFileRecord::new("id0", "h", vec![255; 64]).unwrap();
        assert!(rec.validate(256, None).is_ok());
        assert!(matches!(
            rec.validate(255, None),
            Err(Error::TokenOutOfRange { index: 255, k: 255 })
        ));
    }

    #[test]
    fn rejects_hash_mismatch_and_bad_counts() {
        let rec = TokenFileRecord::new("id0", "aaaa", vec![0; 64]).unwrap();
        assert!(rec.validate(256, Some("aaaa")).is_ok());
        assert!(matches!(
            rec.validate(256, Some("bbbb")),
            Err(Error::CodebookHashMismatch { .. })
        ));
        assert!(TokenFileRecord::new("x", "h", vec![0; 63]).is_err());

        let short_line = "id\thash\t1 2 3\n";
        assert!(read_tokens(short_line.as_bytes(), 256).is_err());
        let garbage = "id\thash\t1 2 nope\n";
        assert!(matches!(
            read_tokens(garbage.as_bytes(), 256),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn random_records_round_trip_losslessly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let records: Vec<TokenFileRecord> = (0..10_000)
            .map(|i| {
                TokenFileRecord::new(
                    &format!("lut_{i:05}"),
                    "0123456789abcdef",
                    (0..64).map(|_| rng.random_range(0..256) as u16).collect(),
                )
                .unwrap()
            })
            .collect();
        let mut buf = Vec::new();
        write_tokens(&mut buf, &records).unwrap();
        let back = read_tokens(&buf[..], 256).unwrap();
        assert_eq!(records, back);
    }
}
