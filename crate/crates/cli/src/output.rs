//! Deterministic text and image serialization helpers.
//!
//! Floating-point values are printed with 17 significant digits so every
//! double round-trips exactly and repeated runs produce byte-identical
//! files.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// 17 significant digits, scientific notation; lossless for f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON string escaping for the hand-built documents.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// 8-bit binary PGM of the image magnitude in dB relative to the peak,
/// floored at -60 dB. Rows follow the image rows (azimuth axis).
pub fn image_to_pgm(img: &DMatrix<Complex64>) -> Vec<u8> {
    let (h, w) = (img.nrows(), img.ncols());
    let peak = img.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h);
    for i in 0..h {
        for j in 0..w {
            let byte = if peak == 0.0 {
                0u8
            } else {
                let v = img[(i, j)].norm();
                let db = if v == 0.0 {
                    -60.0
                } else {
                    (20.0 * (v / peak).log10()).clamp(-60.0, 0.0)
                };
                ((db + 60.0) / 60.0 * 255.0).round() as u8
            };
            out.push(byte);
        }
    }
    out
}

/// Raw complex image as CSV: one `re,im` line per pixel, row-major.
pub fn image_to_csv(img: &DMatrix<Complex64>) -> String {
    let mut out = String::from("re,im\n");
    for i in 0..img.nrows() {
        for j in 0..img.ncols() {
            let v = img[(i, j)];
            out.push_str(&fmt_f64(v.re));
            out.push(',');
            out.push_str(&fmt_f64(v.im));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_round_trips() {
        for x in [1.8816, 0.0, -3.25e-17, 1.0 / 3.0, f64::MAX] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn pgm_header_and_size() {
        let img = DMatrix::from_element(3, 5, Complex64::new(1.0, 0.0));
        let pgm = image_to_pgm(&img);
        assert!(pgm.starts_with(b"P5\n5 3\n255\n"));
        assert_eq!(pgm.len(), b"P5\n5 3\n255\n".len() + 15);
        // uniform image sits at the 0 dB ceiling
        assert!(pgm[pgm.len() - 15..].iter().all(|&b| b == 255));
    }

    #[test]
    fn escape_specials() {
        assert_eq!(json_escape("a\"b\\c\nd"), "a\\\"b\\\\c\\nd");
    }
}
