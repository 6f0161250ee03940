// SPDX-License-Identifier: MIT OR Apache-2.0

//! JSON output with a fixed float convention.
//!
//! Reals are written as the shortest string that round-trips to the same
//! `f64`, then zero-padded to at least nine significant digits so every
//! number in a trace or model file carries the same visible precision.
//! Padding never changes the parsed value.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

/// Minimum number of significant digits written for any real.
pub const MIN_SIGNIFICANT_DIGITS: usize = 9;

/// Formats a finite `f64` per the module convention.
pub fn format_real(value: f64) -> String {
    debug_assert!(value.is_finite());
    if value == 0.0 {
        let sign = if value.is_sign_negative() { "-" } else { "" };
        return format!("{sign}0.{}", "0".repeat(MIN_SIGNIFICANT_DIGITS));
    }
    let mut buf = ryu::Buffer::new();
    let shortest = buf.format_finite(value);
    let (mantissa, exponent) = match shortest.find(['e', 'E']) {
        Some(pos) => shortest.split_at(pos),
        None => (shortest, ""),
    };
    let mut out = String::with_capacity(24);
    out.push_str(mantissa);
    if !mantissa.contains('.') {
        out.push('.');
    }
    let significant = mantissa
        .chars()
        .filter(char::is_ascii_digit)
        .skip_while(|&c| c == '0')
        .count();
    for _ in significant..MIN_SIGNIFICANT_DIGITS {
        out.push('0');
    }
    out.push_str(exponent);
    out
}

#[derive(Default)]
struct Padded<F> {
    inner: F,
}

macro_rules! forward_formatter {
    () => {
        fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
            writer.write_all(format_real(value).as_bytes())
        }
        fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
            self.write_f64(writer, f64::from(value))
        }
        fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.begin_array(w)
        }
        fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.end_array(w)
        }
        fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
            self.inner.begin_array_value(w, first)
        }
        fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.end_array_value(w)
        }
        fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.begin_object(w)
        }
        fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.end_object(w)
        }
        fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
            self.inner.begin_object_key(w, first)
        }
        fn end_object_key<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.end_object_key(w)
        }
        fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.begin_object_value(w)
        }
        fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.inner.end_object_value(w)
        }
    };
}

impl Formatter for Padded<CompactFormatter> {
    forward_formatter!();
}

impl<'a> Formatter for Padded<PrettyFormatter<'a>> {
    forward_formatter!();
}

/// Serializes compactly with padded reals.
pub fn to_vec<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Padded::<CompactFormatter>::default());
    value.serialize(&mut ser)?;
    Ok(out)
}

/// Serializes with indentation and padded reals; ends with a newline.
pub fn to_vec_pretty<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<Vec<u8>> {
    let mut out = Vec::new();
    let fmt = Padded {
        inner: PrettyFormatter::with_indent(b"  "),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, fmt);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pads_short_representations() {
        assert_eq!(format_real(0.5), "0.500000000");
        assert_eq!(format_real(1.0), "1.00000000");
        assert_eq!(format_real(-2.25), "-2.25000000");
        assert_eq!(format_real(0.0), "0.000000000");
        assert_eq!(format_real(1e-10), "1.00000000e-10");
        assert_eq!(format_real(0.001), "0.00100000000");
    }

    #[test]
    fn long_representations_untouched() {
        assert_eq!(format_real(0.1 + 0.2), "0.30000000000000004");
    }

    proptest! {
        #[test]
        fn padded_output_round_trips(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let s = format_real(v);
            let back: f64 = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
            let digits = s.split(['e', 'E']).next().unwrap()
                .chars().filter(char::is_ascii_digit).skip_while(|&c| c == '0').count();
            prop_assert!(v == 0.0 || digits >= MIN_SIGNIFICANT_DIGITS);
        }
    }
}
