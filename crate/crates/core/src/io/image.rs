//! Image I/O: 8-bit RGB PNG and binary PPM (P6).
//!
//! Components decode as v/255 into [0,1]; writing rounds to nearest, so a
//! write→read round trip deviates by at most 1/510 per component. Images
//! are treated as display-referred sRGB; no linearization is applied.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::lut::ImageBuf;

fn decode_bytes(width: usize, height: usize, bytes: &[u8]) -> Result<ImageBuf> {
    let pixels = bytes.iter().map(|&b| b as f32 / 255.0).collect();
    ImageBuf::from_pixels(width, height, pixels)
}

fn encode_bytes(img: &ImageBuf) -> Vec<u8> {
    img.pixels()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

fn read_ppm<R: Read>(mut reader: R, path: &str) -> Result<ImageBuf> {
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;

    // header: "P6" <ws> width <ws> height <ws> maxval <single ws> data
    let mut pos = 0usize;
    let mut fields = Vec::new();
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace()) {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format(format!("{path}: truncated PPM header")));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| {
            Error::Format(format!("{path}: non-ASCII PPM header"))
        })?);
    }
    if fields[0] != "P6" {
        return Err(Error::UnsupportedVariant(format!(
            "{path}: {} is not binary PPM (P6)",
            fields[0]
        )));
    }
    let parse = |s: &str, what: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::Format(format!("{path}: bad PPM {what} {s:?}")))
    };
    let width = parse(fields[1], "width")?;
    let height = parse(fields[2], "height")?;
    let maxval = parse(fields[3], "maxval")?;
    if maxval != 255 {
        return Err(Error::UnsupportedVariant(format!(
            "{path}: PPM maxval {maxval}, only 255 supported"
        )));
    }
    pos += 1; // single whitespace after maxval
    let need = width * height * 3;
    if bytes.len() < pos + need {
        return Err(Error::Truncated {
            expected: need,
            found: bytes.len().saturating_sub(pos),
        });
    }
    decode_bytes(width, height, &bytes[pos..pos + need])
}

fn write_ppm<W: Write>(mut writer: W, img: &ImageBuf, path: &str) -> Result<()> {
    let header = format!("P6\n{} {}\n255\n", img.width(), img.height());
    writer
        .write_all(header.as_bytes())
        .and_then(|_| writer.write_all(&encode_bytes(img)))
        .map_err(|e| Error::io(path, e))
}

/// Read an 8-bit RGB image (PNG or PPM, by extension).
pub fn read_image(path: impl AsRef<Path>) -> Result<ImageBuf> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "ppm" => {
            let file = std::fs::File::open(path).map_err(|e| Error::io(&name, e))?;
            read_ppm(std::io::BufReader::new(file), &name)
        }
        "png" => {
            let dynimg = image::open(path).map_err(|e| Error::Image(format!("{name}: {e}")))?;
            match dynimg {
                image::DynamicImage::ImageRgb8(rgb) => decode_bytes(
                    rgb.width() as usize,
                    rgb.height() as usize,
                    rgb.as_raw(),
                ),
                other => Err(Error::UnsupportedVariant(format!(
                    "{name}: only 8-bit RGB PNG is supported, got {:?}",
                    other.color()
                ))),
            }
        }
        other => Err(Error::UnsupportedVariant(format!(
            "{name}: unsupported image extension {other:?}"
        ))),
    }
}

/// Write an image as PNG or PPM, by extension.
pub fn write_image(img: &ImageBuf, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "ppm" => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(&name, e))?;
            write_ppm(std::io::BufWriter::new(file), img, &name)
        }
        "png" => {
            let buf = image::RgbImage::from_raw(
                img.width() as u32,
                img.height() as u32,
                encode_bytes(img),
            )
            .expect("buffer length matches dimensions");
            buf.save(path)
                .map_err(|e| Error::Image(format!("{name}: {e}")))
        }
        other => Err(Error::UnsupportedVariant(format!(
            "{name}: unsupported image extension {other:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lut::test_support::random_image;

    #[test]
    fn one_pixel_ppm_decodes_to_unit_red() {
        let bytes = b"P6\n1 1\n255\n\xff\x00\x00";
        let img = read_ppm(&bytes[..], "test").unwrap();
        assert_eq!(img.pixel(0, 0), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn ppm_header_comments_are_skipped() {
        let bytes = b"P6\n# made by hand\n2 1\n# another\n255\n\x00\x00\x00\xff\xff\xff";
        let img = read_ppm(&bytes[..], "test").unwrap();
        assert_eq!(img.pixel(0, 0), [0.0, 0.0, 0.0]);
        assert_eq!(img.pixel(1, 0), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn ppm_round_trip_within_half_step() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.ppm");
        let img = random_image(21, 9, 7);
        write_image(&img, &path).unwrap();
        let back = read_image(&path).unwrap();
        let max_dev = img
            .pixels()
            .iter()
            .zip(back.pixels())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_dev <= 1.0 / 510.0 + 1e-7, "max deviation {max_dev}");
    }

    #[test]
    fn png_round_trip_within_half_step() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.png");
        let img = random_image(22, 8, 5);
        write_image(&img, &path).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.width(), 8);
        assert_eq!(back.height(), 5);
        let max_dev = img
            .pixels()
            .iter()
            .zip(back.pixels())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f32, f32::max);
        assert!(max_dev <= 1.0 / 510.0 + 1e-7, "max deviation {max_dev}");
    }

    #[test]
    fn png_golden_pixels() {
        // 2×2 fixture authored in-memory: distinct corner colors survive
        // a byte-exact encode/decode
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("golden.png");
        let img = ImageBuf::from_pixels(
            2,
            2,
            vec![
                1.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, //
                0.0, 0.0, 1.0, //
                1.0, 1.0, 1.0,
            ],
        )
        .unwrap();
        write_image(&img, &path).unwrap();
        let back = read_image(&path).unwrap();
        assert_eq!(back.pixel(0, 0), [1.0, 0.0, 0.0]);
        assert_eq!(back.pixel(1, 0), [0.0, 1.0, 0.0]);
        assert_eq!(back.pixel(0, 1), [0.0, 0.0, 1.0]);
        assert_eq!(back.pixel(1, 1), [1.0, 1.0, 1.0]);
    }

    #[test]
    fn typed_errors_for_bad_images() {
        let truncated = b"P6\n4 4\n255\n\x00\x00";
        assert!(matches!(
            read_ppm(&truncated[..], "t"),
            Err(Error::Truncated { .. })
        ));
        let ascii = b"P3\n1 1\n255\n255 0 0\n";
        assert!(matches!(
            read_ppm(&ascii[..], "t"),
            Err(Error::UnsupportedVariant(_))
        ));
        assert!(read_image("/nonexistent/missing.ppm").is_err());
        assert!(matches!(
            read_image("/tmp/file.gif"),
            Err(Error::UnsupportedVariant(_))
        ));
    }
}
