//! Minimal `.npy` support: version 1.0, C order, little-endian, two
//! dimensions, `float32` or `uint8` payloads.
//!
//! Shape is `(height, width)` so rows follow NumPy's row-major layout.

use crate::map::SaliencyMap;

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const PREAMBLE_LEN: usize = 10;
const ALIGN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dtype {
    F32,
    U8,
}

impl Dtype {
    fn parse(descr: &str) -> Result<Self, String> {
        match descr {
            "<f4" => Ok(Dtype::F32),
            "|u1" | "<u1" => Ok(Dtype::U8),
            ">f4" => Err("big-endian float32 is not supported".into()),
            other => Err(format!("unsupported dtype '{other}' (expected '<f4' or '|u1')")),
        }
    }

    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::U8 => 1,
        }
    }
}

#[derive(Debug)]
struct Header {
    dtype: Dtype,
    fortran_order: bool,
    shape: Vec<usize>,
}

/// Python dict literal values that appear in npy headers.
#[derive(Debug)]
enum Value {
    Str(String),
    Bool(bool),
    Tuple(Vec<usize>),
}

struct DictParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> DictParser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), String> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(format!("malformed header: expected '{}' at offset {}", c as char, self.pos))
        }
    }

    fn string(&mut self) -> Result<String, String> {
        let quote = self.peek().filter(|c| *c == b'\'' || *c == b'"');
        let quote = quote.ok_or_else(|| format!("malformed header: expected string at offset {}", self.pos))?;
        self.pos += 1;
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos] != quote {
            self.pos += 1;
        }
        if self.pos >= self.s.len() {
            return Err("malformed header: unterminated string".into());
        }
        let out = String::from_utf8_lossy(&self.s[start..self.pos]).into_owned();
        self.pos += 1;
        Ok(out)
    }

    fn word(&mut self) -> &'a [u8] {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        &self.s[start..self.pos]
    }

    fn value(&mut self) -> Result<Value, String> {
        match self.peek() {
            Some(b'\'') | Some(b'"') => self.string().map(Value::Str),
            Some(b'(') => {
                self.pos += 1;
                let mut dims = Vec::new();
                loop {
                    if self.peek() == Some(b')') {
                        self.pos += 1;
                        break;
                    }
                    let w = self.word();
                    let text = std::str::from_utf8(w).unwrap_or("");
                    let n = text
                        .trim_end_matches('L')
                        .parse::<usize>()
                        .map_err(|_| format!("malformed header: bad shape entry '{text}'"))?;
                    dims.push(n);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b')') => {}
                        _ => return Err("malformed header: bad shape tuple".into()),
                    }
                }
                Ok(Value::Tuple(dims))
            }
            _ => match self.word() {
                b"True" => Ok(Value::Bool(true)),
                b"False" => Ok(Value::Bool(false)),
                other => Err(format!(
                    "malformed header: unexpected value '{}'",
                    String::from_utf8_lossy(other)
                )),
            },
        }
    }

    fn dict(&mut self) -> Result<Vec<(String, Value)>, String> {
        self.expect(b'{')?;
        let mut entries = Vec::new();
        loop {
            if self.peek() == Some(b'}') {
                self.pos += 1;
                return Ok(entries);
            }
            let key = self.string()?;
            self.expect(b':')?;
            let value = self.value()?;
            entries.push((key, value));
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {}
                _ => return Err("malformed header: expected ',' or '}'".into()),
            }
        }
    }
}

fn parse_header(text: &[u8]) -> Result<Header, String> {
    let entries = DictParser { s: text, pos: 0 }.dict()?;
    let (mut dtype, mut fortran_order, mut shape) = (None, None, None);
    for (key, value) in entries {
        match (key.as_str(), value) {
            ("descr", Value::Str(s)) => dtype = Some(Dtype::parse(&s)?),
            ("fortran_order", Value::Bool(b)) => fortran_order = Some(b),
            ("shape", Value::Tuple(t)) => shape = Some(t),
            (k @ ("descr" | "fortran_order" | "shape"), v) => {
                return Err(format!("malformed header: bad value for '{k}': {v:?}"))
            }
            (other, _) => return Err(format!("malformed header: unknown key '{other}'")),
        }
    }
    Ok(Header {
        dtype: dtype.ok_or("malformed header: missing 'descr'")?,
        fortran_order: fortran_order.ok_or("malformed header: missing 'fortran_order'")?,
        shape: shape.ok_or("malformed header: missing 'shape'")?,
    })
}

pub fn decode(bytes: &[u8]) -> Result<SaliencyMap, String> {
    if bytes.len() < PREAMBLE_LEN || &bytes[..6] != MAGIC {
        return Err("not an npy file (bad magic)".into());
    }
    let (major, minor) = (bytes[6], bytes[7]);
    if (major, minor) != (1, 0) {
        return Err(format!("unsupported npy version {major}.{minor} (expected 1.0)"));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let data_start = PREAMBLE_LEN + header_len;
    if bytes.len() < data_start {
        return Err("truncated npy header".into());
    }
    let header = parse_header(&bytes[PREAMBLE_LEN..data_start])?;
    if header.fortran_order {
        return Err("Fortran-order arrays are not supported".into());
    }
    if header.shape.len() != 2 {
        return Err(format!(
            "expected 2 dimensions, found {} (shape {:?})",
            header.shape.len(),
            header.shape
        ));
    }
    let (height, width) = (header.shape[0], header.shape[1]);
    if width == 0 || height == 0 {
        return Err(format!("empty array shape ({height}, {width})"));
    }
    let count = width * height;
    let payload = &bytes[data_start..];
    let expected = count * header.dtype.size();
    if payload.len() != expected {
        return Err(format!(
            "payload has {} bytes, shape ({height}, {width}) needs {expected}",
            payload.len()
        ));
    }
    let values: Vec<f64> = match header.dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        Dtype::U8 => payload.iter().map(|&b| b as f64).collect(),
    };
    SaliencyMap::new(width, height, values).map_err(|e| e.to_string())
}

fn encode(width: usize, height: usize, descr: &str, payload: &[u8]) -> Vec<u8> {
    let mut dict = format!("{{'descr': '{descr}', 'fortran_order': False, 'shape': ({height}, {width}), }}");
    let unpadded = PREAMBLE_LEN + dict.len() + 1;
    dict.extend(std::iter::repeat_n(' ', unpadded.next_multiple_of(ALIGN) - unpadded));
    dict.push('\n');

    let mut out = Vec::with_capacity(PREAMBLE_LEN + dict.len() + payload.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(dict.len() as u16).to_le_bytes());
    out.extend_from_slice(dict.as_bytes());
    out.extend_from_slice(payload);
    out
}

/// Encodes as `<f4`. Values are narrowed to `f32`.
pub fn encode_f32(map: &SaliencyMap) -> Vec<u8> {
    let payload: Vec<u8> = map
        .values()
        .iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect();
    encode(map.width(), map.height(), "<f4", &payload)
}

/// Encodes as `|u1`, rounding and clamping to `[0, 255]`.
pub fn encode_u8(map: &SaliencyMap) -> Vec<u8> {
    let payload: Vec<u8> = map
        .values()
        .iter()
        .map(|&v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    encode(map.width(), map.height(), "|u1", &payload)
}
