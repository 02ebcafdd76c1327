//! Binary PGM (`P5`) with maxval 255.

use crate::map::SaliencyMap;

struct Tokens<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Tokens<'_> {
    /// Next whitespace-delimited header token, skipping `#` comments.
    fn next(&mut self) -> Option<&[u8]> {
        loop {
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            if self.s.get(self.pos) == Some(&b'#') {
                while self.pos < self.s.len() && self.s[self.pos] != b'\n' {
                    self.pos += 1;
                }
                continue;
            }
            break;
        }
        let start = self.pos;
        while self.pos < self.s.len() && !self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.s[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<usize, String> {
        let tok = self.next().ok_or_else(|| format!("truncated PGM header: missing {what}"))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format!("malformed PGM header: bad {what} '{}'", String::from_utf8_lossy(tok)))
    }
}

pub fn decode(bytes: &[u8]) -> Result<SaliencyMap, String> {
    let mut tokens = Tokens { s: bytes, pos: 0 };
    match tokens.next() {
        Some(b"P5") => {}
        Some(b"P2") => return Err("ASCII PGM (P2) is not supported, expected P5".into()),
        _ => return Err("not a binary PGM (missing P5 magic)".into()),
    }
    let width = tokens.number("width")?;
    let height = tokens.number("height")?;
    let maxval = tokens.number("maxval")?;
    if maxval != 255 {
        return Err(format!("unsupported PGM maxval {maxval} (only 255 is supported)"));
    }
    if width == 0 || height == 0 {
        return Err(format!("empty PGM image {width}x{height}"));
    }
    // exactly one whitespace byte separates the header from the raster
    let start = tokens.pos + 1;
    let payload = bytes.get(start..).unwrap_or(&[]);
    if payload.len() != width * height {
        return Err(format!(
            "PGM raster has {} bytes, {width}x{height} needs {}",
            payload.len(),
            width * height
        ));
    }
    SaliencyMap::new(width, height, payload.iter().map(|&b| b as f64).collect()).map_err(|e| e.to_string())
}

/// Rounds and clamps intensities to `[0, 255]`.
pub fn encode(map: &SaliencyMap) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", map.width(), map.height()).into_bytes();
    out.extend(map.values().iter().map(|&v| v.round().clamp(0.0, 255.0) as u8));
    out
}
