//! Result envelope and its JSON encoding.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};
use stripgain::linalg::Matrix;

/// Writes every float with 17 significant digits.
struct FixedDigits;

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serializes `value` with [`FixedDigits`], two-space indented.
pub fn to_string(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, Pretty::default());
    value.serialize(&mut ser).expect("in-memory JSON");
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// `PrettyFormatter` with the float handling of [`FixedDigits`].
#[derive(Default)]
struct Pretty {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for Pretty {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        FixedDigits.write_f64(writer, value)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        FixedDigits.write_f32(writer, value)
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

/// A float as JSON; non-finite values become `"inf"`, `"-inf"` or `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        // no negative zero in the output
        json!(x + 0.0)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().copied().map(num).collect())
}

pub fn matrix(m: &Matrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| num(m[(i, j)])).collect()))
            .collect(),
    )
}

/// Hex SHA-256 of the given byte strings, each length-prefixed.
pub fn digest<'a>(parts: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Output of one command: fields are emitted in a fixed order.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub command: Value,
    pub inputs_digest: String,
    pub results: Map<String, Value>,
    pub certificates: Map<String, Value>,
    pub warnings: Vec<String>,
}

impl Envelope {
    pub fn new(verb: &str, args: &[String], inputs_digest: String) -> Self {
        Self {
            command: json!({ "verb": verb, "args": args }),
            inputs_digest,
            results: Map::new(),
            certificates: Map::new(),
            warnings: Vec::new(),
        }
    }

    pub fn result(&mut self, key: &str, value: Value) -> &mut Self {
        self.results.insert(key.to_string(), value);
        self
    }

    pub fn certificate(&mut self, key: &str, value: Value) -> &mut Self {
        self.certificates.insert(key.to_string(), value);
        self
    }

    pub fn warn(&mut self, msg: impl Into<String>) -> &mut Self {
        self.warnings.push(msg.into());
        self
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "results": self.results,
            "certificates": self.certificates,
            "warnings": self.warnings,
        })
    }

    pub fn render(&self) -> String {
        to_string(&self.to_value())
    }
}

/// Float cell for CSV output, same digits as the JSON.
pub fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x + 0.0)
    } else {
        num(x).as_str().unwrap_or("nan").to_string()
    }
}
