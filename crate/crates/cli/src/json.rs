//! JSON output with every float written to 17 significant digits.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Pretty formatter that prints floats as `d.dddddddddddddddde±x`.
#[derive(Default)]
pub struct SignificantDigits<'a> {
    inner: PrettyFormatter<'a>,
}

fn write_sig<W: ?Sized + io::Write>(w: &mut W, x: f64) -> io::Result<()> {
    // serde_json routes non-finite values to `write_null` before we get here.
    write!(w, "{x:.16e}")
}

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for SignificantDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write_sig(w, value)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write_sig(w, value as f64)
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

/// Serializes `value` with [`SignificantDigits`].
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits::default());
    value.serialize(&mut ser).expect("report types serialize infallibly");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = to_json_string(&[9.0 / 47.0, 0.0, -1e-300, f64::INFINITY]);
        let v: Vec<serde_json::Value> = serde_json::from_str(&s).unwrap();
        assert!(v[3].is_null());
        let texts: Vec<&str> = s.split(|c: char| c == ',' || c.is_whitespace() || c == '[' || c == ']')
            .filter(|t| !t.is_empty())
            .collect();
        assert_eq!(texts[0], "1.9148936170212766e-1");
        assert_eq!(texts[0].parse::<f64>().unwrap(), 9.0 / 47.0);
        assert_eq!(texts[2].parse::<f64>().unwrap(), -1e-300);
    }
}
