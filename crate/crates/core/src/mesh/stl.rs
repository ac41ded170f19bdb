//! Binary and ASCII STL reading and binary STL writing.
//!
//! Units are millimetres throughout; STL carries no unit information and
//! dental scanners always emit millimetres.

use std::fmt::Write as _;

use thiserror::Error;

const HEADER_LEN: usize = 80;
const COUNT_LEN: usize = 4;
const RECORD_LEN: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StlError {
    #[error("empty STL input")]
    Empty,
    #[error("truncated binary STL: header declares {declared} triangles but only {available} complete records present (file ends at byte {len})")]
    Truncated {
        declared: u32,
        available: usize,
        len: usize,
    },
    #[error("binary STL triangle count mismatch: header declares {declared}, file holds {actual} records plus {trailing} trailing bytes")]
    CountMismatch {
        declared: u32,
        actual: usize,
        trailing: usize,
    },
    #[error("line {line}: expected a number, found {token:?}")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: expected {expected:?}, found {found:?}")]
    Unexpected {
        line: usize,
        expected: &'static str,
        found: String,
    },
    #[error("line {line}: unexpected end of ASCII STL")]
    UnexpectedEof { line: usize },
    #[error("non-finite coordinate in triangle {triangle}")]
    NonFinite { triangle: usize },
}

/// One facet as stored in the file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub vertices: [[f64; 3]; 3],
    /// The normal stored in the file. Never used for geometry.
    pub stored_normal: [f64; 3],
}

/// An unordered list of triangles, each carrying its own copy of its corners.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleSoup {
    pub facets: Vec<Facet>,
}

impl TriangleSoup {
    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn from_triangles<I: IntoIterator<Item = [[f64; 3]; 3]>>(triangles: I) -> Self {
        TriangleSoup {
            facets: triangles
                .into_iter()
                .map(|vertices| Facet {
                    vertices,
                    stored_normal: [0.0; 3],
                })
                .collect(),
        }
    }
}

/// Parses binary or ASCII STL content.
///
/// Binary is assumed whenever the length matches `84 + 50 * count`. Otherwise
/// content starting with `solid` is read as ASCII, and anything else is
/// treated as a damaged binary file.
pub fn parse_stl(bytes: &[u8]) -> Result<TriangleSoup, StlError> {
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(StlError::Empty);
    }
    if bytes.len() >= HEADER_LEN + COUNT_LEN {
        let declared = read_count(bytes);
        if bytes.len() as u64 == expected_len(declared) {
            return parse_binary(bytes);
        }
    }
    if looks_ascii(bytes) {
        let text = String::from_utf8_lossy(bytes);
        return parse_ascii(&text);
    }
    parse_binary(bytes)
}

fn read_count(bytes: &[u8]) -> u32 {
    u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + COUNT_LEN].try_into().unwrap())
}

fn expected_len(count: u32) -> u64 {
    (HEADER_LEN + COUNT_LEN) as u64 + RECORD_LEN as u64 * count as u64
}

fn looks_ascii(bytes: &[u8]) -> bool {
    let start = bytes.iter().position(|b| !b.is_ascii_whitespace()).unwrap_or(0);
    bytes[start..].starts_with(b"solid") && bytes.iter().take(1024).all(|b| b.is_ascii())
}

fn parse_binary(bytes: &[u8]) -> Result<TriangleSoup, StlError> {
    let len = bytes.len();
    if len < HEADER_LEN + COUNT_LEN {
        return Err(StlError::Truncated {
            declared: 0,
            available: 0,
            len,
        });
    }
    let declared = read_count(bytes);
    let body = len - HEADER_LEN - COUNT_LEN;
    let available = body / RECORD_LEN;
    if (available as u64) < declared as u64 {
        return Err(StlError::Truncated {
            declared,
            available,
            len,
        });
    }
    if available as u64 > declared as u64 || body % RECORD_LEN != 0 {
        return Err(StlError::CountMismatch {
            declared,
            actual: available,
            trailing: body - declared as usize * RECORD_LEN,
        });
    }

    let mut facets = Vec::with_capacity(declared as usize);
    for (t, record) in bytes[HEADER_LEN + COUNT_LEN..]
        .chunks_exact(RECORD_LEN)
        .enumerate()
    {
        let f = |k: usize| {
            f32::from_le_bytes(record[4 * k..4 * k + 4].try_into().unwrap()) as f64
        };
        let stored_normal = [f(0), f(1), f(2)];
        let vertices = [
            [f(3), f(4), f(5)],
            [f(6), f(7), f(8)],
            [f(9), f(10), f(11)],
        ];
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(StlError::NonFinite { triangle: t });
        }
        facets.push(Facet {
            vertices,
            stored_normal,
        });
    }
    Ok(TriangleSoup { facets })
}

struct Tokens<'a> {
    inner: Box<dyn Iterator<Item = (usize, &'a str)> + 'a>,
    last_line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let inner = text
            .lines()
            .enumerate()
            .flat_map(|(i, l)| l.split_whitespace().map(move |t| (i + 1, t)));
        Tokens {
            inner: Box::new(inner),
            last_line: 1,
        }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let item = self.inner.next();
        if let Some((line, _)) = item {
            self.last_line = line;
        }
        item
    }

    fn expect(&mut self, keyword: &'static str) -> Result<(), StlError> {
        match self.next() {
            Some((_, t)) if t.eq_ignore_ascii_case(keyword) => Ok(()),
            Some((line, t)) => Err(StlError::Unexpected {
                line,
                expected: keyword,
                found: t.to_string(),
            }),
            None => Err(StlError::UnexpectedEof {
                line: self.last_line,
            }),
        }
    }

    fn number(&mut self) -> Result<f64, StlError> {
        match self.next() {
            Some((line, t)) => match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(StlError::BadNumber {
                    line,
                    token: t.to_string(),
                }),
            },
            None => Err(StlError::UnexpectedEof {
                line: self.last_line,
            }),
        }
    }

    fn triple(&mut self) -> Result<[f64; 3], StlError> {
        Ok([self.number()?, self.number()?, self.number()?])
    }
}

fn parse_ascii(text: &str) -> Result<TriangleSoup, StlError> {
    let mut tokens = Tokens::new(text);
    tokens.expect("solid")?;
    // The solid name is optional and may span several tokens.
    let mut facets = Vec::new();
    loop {
        let Some((line, tok)) = tokens.next() else {
            return Err(StlError::UnexpectedEof {
                line: tokens.last_line,
            });
        };
        if tok.eq_ignore_ascii_case("endsolid") {
            break;
        }
        if !tok.eq_ignore_ascii_case("facet") {
            if facets.is_empty() {
                continue; // part of the solid name
            }
            return Err(StlError::Unexpected {
                line,
                expected: "facet",
                found: tok.to_string(),
            });
        }
        tokens.expect("normal")?;
        let stored_normal = tokens.triple()?;
        tokens.expect("outer")?;
        tokens.expect("loop")?;
        let mut vertices = [[0.0; 3]; 3];
        for v in &mut vertices {
            tokens.expect("vertex")?;
            *v = tokens.triple()?;
        }
        tokens.expect("endloop")?;
        tokens.expect("endfacet")?;
        facets.push(Facet {
            vertices,
            stored_normal,
        });
    }
    Ok(TriangleSoup { facets })
}

/// Writes a binary STL. Coordinates are narrowed to `f32`.
pub fn write_binary_stl(soup: &TriangleSoup) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + COUNT_LEN + RECORD_LEN * soup.len());
    let mut header = [b' '; HEADER_LEN];
    let tag = b"binary STL written by archmark";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(soup.len() as u32).to_le_bytes());
    for facet in &soup.facets {
        for c in facet.stored_normal.iter().chain(facet.vertices.iter().flatten()) {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

/// Writes an ASCII STL, mostly useful for tests and debugging.
pub fn write_ascii_stl(soup: &TriangleSoup, name: &str) -> String {
    let mut s = String::new();
    writeln!(s, "solid {name}").unwrap();
    for f in &soup.facets {
        let n = f.stored_normal;
        writeln!(s, "  facet normal {} {} {}", n[0], n[1], n[2]).unwrap();
        writeln!(s, "    outer loop").unwrap();
        for v in &f.vertices {
            writeln!(s, "      vertex {} {} {}", v[0], v[1], v[2]).unwrap();
        }
        writeln!(s, "    endloop").unwrap();
        writeln!(s, "  endfacet").unwrap();
    }
    writeln!(s, "endsolid {name}").unwrap();
    s
}
