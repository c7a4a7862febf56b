//! Number formatting and report writers. JSON floats carry 17 significant
//! digits so they parse back to the same `f64`; non-finite values become
//! `null`. CSV cells use 6 significant digits.

use std::io::{self, Write};

use serde::Serialize;

/// `serde_json` formatter that prints every `f64` with 17 significant digits.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        // Non-finite values never reach here: the serializer emits null.
        w.write_all(format!("{value:.16e}").as_bytes())
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// `%g`-style rendering with `sig` significant digits.
pub fn sig(value: f64, sig: usize) -> String {
    if !value.is_finite() {
        return if value.is_nan() { "nan".into() } else if value > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if value == 0.0 {
        return "0".into();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, value);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if exp < -4 || exp >= sig as i32 {
        format!("{}e{}", trim_zeros(mant), exp)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{value:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const CSV_DIGITS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => sig(*v, CSV_DIGITS),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl From<$t> for Cell {
            fn from(v: $t) -> Self {
                Cell::Int(v as i64)
            }
        }
    )*};
}
int_cell!(u32, u64, usize, i32, i64);

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> csv::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_digits() {
        assert_eq!(sig(5.82842712474619, 6), "5.82843");
        assert_eq!(sig(1002762.0, 6), "1.00276e6");
        assert_eq!(sig(0.000123456789, 6), "0.000123457");
        assert_eq!(sig(1.5e-7, 6), "1.5e-7");
        assert_eq!(sig(-2.0, 6), "-2");
        assert_eq!(sig(100000.0, 6), "100000");
        assert_eq!(sig(f64::NAN, 6), "nan");
    }

    #[test]
    fn json_round_trips() {
        for v in [0.1, 1.0 / 3.0, 5.82842712474619, 1e-300, f64::MAX, -0.0, 123456789.0] {
            let s = to_json(&v).unwrap();
            assert_eq!(s.trim().parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(to_json(&f64::NAN).unwrap().trim(), "null");
    }
}
