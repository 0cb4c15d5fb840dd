//! Schema-stable JSON: compact, with every float written to 17 significant
//! digits so output is byte-identical for identical values.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::error::Result;

/// Formats a finite float with 17 significant digits. Positional notation is
/// used for decimal exponents in `-5..=16`, scientific otherwise.
pub fn fmt_sig17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{:.16e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let sign = if x < 0.0 { "-" } else { "" };
    if !(-5..=16).contains(&exp) {
        return format!("{sign}{mantissa}e{exp}");
    }
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{digits}")
    } else {
        let (int, frac) = digits.split_at(exp as usize + 1);
        let frac = if frac.is_empty() { "0" } else { frac };
        format!("{sign}{int}.{frac}")
    }
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sig17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_sig17(0.5), "0.50000000000000000");
        assert_eq!(fmt_sig17(-2.0), "-2.0000000000000000");
        assert_eq!(fmt_sig17(0.1), "0.10000000000000001");
        assert_eq!(fmt_sig17(2f64.powi(-23)), "1.1920928955078125e-7");
        assert_eq!(fmt_sig17(123456.0), "123456.00000000000");
        assert_eq!(fmt_sig17(0.0), "0.0");
        for x in [0.17981, 1e-300, 3.0e20, -7.25e-3, std::f64::consts::PI] {
            assert_eq!(fmt_sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn non_finite_becomes_null() {
        let s = to_string(&serde_json::json!({"a": 1, "b": [0.25]})).unwrap();
        assert_eq!(s, r#"{"a":1,"b":[0.25000000000000000]}"#);
        assert_eq!(to_string(&f64::NAN).unwrap(), "null");
    }
}
