//! Tuple coordinates for nested text streams.
//!
//! Every token of a document is placed in a region addressed by a
//! fixed-width tuple of slots. Slot 1 counts top-level sections; each
//! deeper slot counts sibling regions under the parent and remembers the
//! delimiter that opened it. Within a region, tokens are numbered by their
//! position ("proper time").

mod annotation;
mod document;

pub use annotation::{ingest_annotations, parse_annotation, AnnotationTriple};
pub use document::doc_to_graph;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DEFAULT_WIDTH: usize = 5;

/// Token marking the end of a stream.
pub const END_SENTINEL: &str = "@";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Opener {
    Brace,
    Bracket,
    Tag(String),
}

impl Opener {
    pub fn glyph(&self) -> String {
        match self {
            Opener::Brace => "{".into(),
            Opener::Bracket => "[".into(),
            Opener::Tag(name) => format!("<{name}>"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub ordinal: u32,
    pub opener: Option<Opener>,
}

impl Slot {
    const EMPTY: Slot = Slot {
        ordinal: 0,
        opener: None,
    };

    pub fn is_empty(&self) -> bool {
        self.ordinal == 0
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ordinal)?;
        if let Some(o) = &self.opener {
            f.write_str(&o.glyph())?;
        }
        Ok(())
    }
}

/// A region address. Once a slot is empty, all deeper slots are empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionCoord {
    slots: Vec<Slot>,
}

impl RegionCoord {
    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn width(&self) -> usize {
        self.slots.len()
    }

    /// Number of nonempty slots.
    pub fn depth(&self) -> usize {
        self.slots.iter().take_while(|s| !s.is_empty()).count()
    }

    /// The enclosing region, or `None` for a top-level region.
    pub fn parent(&self) -> Option<RegionCoord> {
        let depth = self.depth();
        if depth <= 1 {
            return None;
        }
        let mut slots = self.slots.clone();
        slots[depth - 1] = Slot::EMPTY;
        Some(RegionCoord { slots })
    }

    /// Compact form listing the nonempty slots, e.g. `2.4{.2{.1[`.
    pub fn path(&self) -> String {
        self.slots[..self.depth()]
            .iter()
            .map(Slot::to_string)
            .collect::<Vec<_>>()
            .join(".")
    }

    /// The listing header, e.g. `Dimension/Region ( 2,  1{,  0, )  -> `.
    pub fn header(&self) -> String {
        let mut out = String::from("Dimension/Region (");
        for s in &self.slots {
            out.push_str(&format!(" {s}, "));
        }
        out.push_str(")  -> ");
        out
    }
}

impl fmt::Display for RegionCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.path())
    }
}

/// A region and the tokens it holds, in order. Regions that were entered
/// but hold nothing are kept; they mark section boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub coord: RegionCoord,
    pub tokens: Vec<String>,
}

impl Region {
    pub fn events(&self) -> impl Iterator<Item = TokenEvent> + '_ {
        self.tokens.iter().enumerate().map(|(index, token)| TokenEvent {
            region: self.coord.clone(),
            index,
            token: token.clone(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenEvent {
    pub region: RegionCoord,
    pub index: usize,
    pub token: String,
}

/// All token events of `regions`, in stream order.
pub fn events(regions: &[Region]) -> Vec<TokenEvent> {
    regions.iter().flat_map(Region::events).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    /// Braces, brackets, quoted strings, `:` and `,`.
    JsonLike,
    /// As `JsonLike`, plus `<tag>`/`</tag>` pairs as regions. Unclosed
    /// regions at the end of the stream are tolerated.
    MixedMarkup,
}

impl FromStr for Dialect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" | "json_like" | "json-like" => Ok(Dialect::JsonLike),
            "mixed" | "mixed_markup" | "mixed-markup" => Ok(Dialect::MixedMarkup),
            other => Err(Error::invalid(format!(
                "unknown dialect {other:?} (expected json or mixed)"
            ))),
        }
    }
}

/// Coordinatizes `input` with the default slot width.
pub fn coordinatize(input: &str, dialect: Dialect) -> Result<Vec<Region>> {
    coordinatize_with_width(input, dialect, DEFAULT_WIDTH)
}

pub fn coordinatize_with_width(input: &str, dialect: Dialect, width: usize) -> Result<Vec<Region>> {
    if width < 2 {
        return Err(Error::invalid(format!("slot width {width} must be at least 2")));
    }
    let mut m = Machine::new(width);
    let mut lexer = Lexer::new(input, dialect);
    while let Some((lexeme, line, column)) = lexer.next_lexeme()? {
        match lexeme {
            Lexeme::Open(opener) => m.open(opener, line, column)?,
            Lexeme::Close(opener) => m.close(&opener, line, column)?,
            Lexeme::Token(t) => m.token(t),
            Lexeme::Separator => m.separator(),
        }
    }
    m.finish(dialect, lexer.line, lexer.column)
}

/// Renders regions in the listing layout: a header line per region and
/// one line per token.
pub fn render_regions(regions: &[Region]) -> String {
    let mut out = String::new();
    for r in regions {
        out.push('\n');
        out.push_str(&r.coord.header());
        out.push('\n');
        for (i, t) in r.tokens.iter().enumerate() {
            out.push_str(&format!(" - path/proper time location[{i}]({t})\n"));
        }
    }
    out
}

/// Collapses all whitespace runs to single spaces, for comparing listings.
pub fn normalize_listing(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

struct Machine {
    slots: Vec<Slot>,
    /// Index of the innermost open slot.
    level: usize,
    /// The innermost region was just opened and has seen nothing yet.
    fresh: bool,
    stack: Vec<Opener>,
    regions: Vec<Region>,
}

impl Machine {
    fn new(width: usize) -> Self {
        let mut slots = vec![Slot::EMPTY; width];
        slots[0].ordinal = 1;
        let mut m = Machine {
            slots,
            level: 0,
            fresh: false,
            stack: Vec::new(),
            regions: Vec::new(),
        };
        m.touch();
        m
    }

    fn coord(&self) -> RegionCoord {
        RegionCoord {
            slots: self.slots.clone(),
        }
    }

    /// Makes the current region the last emitted one.
    fn touch(&mut self) -> &mut Region {
        let coord = self.coord();
        if self.regions.last().is_none_or(|r| r.coord != coord) {
            self.regions.push(Region {
                coord,
                tokens: Vec::new(),
            });
        }
        self.regions.last_mut().expect("just pushed")
    }

    fn open(&mut self, opener: Opener, line: usize, column: usize) -> Result<()> {
        if !self.fresh {
            self.slots[self.level].ordinal += 1;
        }
        if self.level + 1 == self.slots.len() {
            return Err(Error::DepthExceeded {
                width: self.slots.len(),
                line,
                column,
            });
        }
        self.level += 1;
        self.slots[self.level] = Slot {
            ordinal: 1,
            opener: Some(opener.clone()),
        };
        self.fresh = true;
        self.stack.push(opener);
        Ok(())
    }

    fn close(&mut self, opener: &Opener, line: usize, column: usize) -> Result<()> {
        match self.stack.last() {
            Some(top) if top == opener => {}
            Some(top) => {
                return Err(Error::Parse {
                    line,
                    column,
                    message: format!("{} closed by {}", top.glyph(), closing_glyph(opener)),
                })
            }
            None => {
                return Err(Error::Parse {
                    line,
                    column,
                    message: format!("unmatched {}", closing_glyph(opener)),
                })
            }
        }
        self.stack.pop();
        self.slots[self.level] = Slot::EMPTY;
        self.level -= 1;
        self.slots[self.level].ordinal += 1;
        self.fresh = false;
        if self.level == 0 {
            self.touch();
        }
        Ok(())
    }

    fn token(&mut self, token: String) {
        self.fresh = false;
        self.touch().tokens.push(token);
    }

    fn separator(&mut self) {
        self.fresh = false;
        self.touch();
    }

    fn finish(mut self, dialect: Dialect, line: usize, column: usize) -> Result<Vec<Region>> {
        if let Some(open) = self.stack.last() {
            if dialect == Dialect::JsonLike {
                return Err(Error::Parse {
                    line,
                    column,
                    message: format!("unclosed {} at end of input", open.glyph()),
                });
            }
            return Ok(self.regions);
        }
        self.slots[0].ordinal += 1;
        self.token(END_SENTINEL.to_string());
        Ok(self.regions)
    }
}

fn closing_glyph(opener: &Opener) -> String {
    match opener {
        Opener::Brace => "}".into(),
        Opener::Bracket => "]".into(),
        Opener::Tag(name) => format!("</{name}>"),
    }
}

enum Lexeme {
    Open(Opener),
    Close(Opener),
    Token(String),
    /// Whitespace or a comma.
    Separator,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    rest: &'a str,
    dialect: Dialect,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str, dialect: Dialect) -> Self {
        Lexer {
            chars: input.chars().peekable(),
            rest: input,
            dialect,
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn next_lexeme(&mut self) -> Result<Option<(Lexeme, usize, usize)>> {
        let (line, column) = (self.line, self.column);
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let lexeme = match c {
            c if c.is_whitespace() || c == ',' => {
                while self.chars.peek().is_some_and(|&c| c.is_whitespace() || c == ',') {
                    self.bump();
                }
                Lexeme::Separator
            }
            '{' | '[' => {
                self.bump();
                Lexeme::Open(if c == '{' { Opener::Brace } else { Opener::Bracket })
            }
            '}' | ']' => {
                self.bump();
                Lexeme::Close(if c == '}' { Opener::Brace } else { Opener::Bracket })
            }
            ':' => {
                self.bump();
                Lexeme::Token(":".into())
            }
            '"' => Lexeme::Token(self.quoted(line, column)?),
            '<' if self.dialect == Dialect::MixedMarkup => match self.tag() {
                Some(lexeme) => lexeme,
                None => Lexeme::Token(self.word()),
            },
            _ => Lexeme::Token(self.word()),
        };
        Ok(Some((lexeme, line, column)))
    }

    fn quoted(&mut self, line: usize, column: usize) -> Result<String> {
        let mut out = String::new();
        out.push(self.bump().expect("opening quote"));
        loop {
            match self.bump() {
                Some('"') => {
                    out.push('"');
                    return Ok(out);
                }
                Some('\\') => {
                    out.push('\\');
                    if let Some(c) = self.bump() {
                        out.push(c);
                    }
                }
                Some(c) => out.push(c),
                None => {
                    return Err(Error::Parse {
                        line,
                        column,
                        message: "unterminated string".into(),
                    })
                }
            }
        }
    }

    /// A bare word runs to whitespace or structural punctuation. In mixed
    /// markup a `<` that does not start a tag is part of the word.
    fn word(&mut self) -> String {
        let mut out = String::new();
        if let Some(c) = self.bump() {
            out.push(c);
        }
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() || matches!(c, '{' | '}' | '[' | ']' | ',' | ':' | '"') {
                break;
            }
            if c == '<' && self.dialect == Dialect::MixedMarkup && tag_at(self.rest).is_some() {
                break;
            }
            self.bump();
            out.push(c);
        }
        out
    }

    fn tag(&mut self) -> Option<Lexeme> {
        let (lexeme, len) = tag_at(self.rest)?;
        for _ in 0..len {
            self.bump();
        }
        Some(lexeme)
    }
}

/// Recognizes `<name>`, `</name>` or `<name/>` at the start of `s`,
/// returning the lexeme and its length in chars.
fn tag_at(s: &str) -> Option<(Lexeme, usize)> {
    let body = s.strip_prefix('<')?;
    let (closing, body) = match body.strip_prefix('/') {
        Some(b) => (true, b),
        None => (false, body),
    };
    let mut name_len = 0;
    for (i, c) in body.chars().enumerate() {
        let ok = if i == 0 {
            c.is_ascii_alphabetic() || c == '_'
        } else {
            c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':' | '-')
        };
        if !ok {
            break;
        }
        name_len += 1;
    }
    if name_len == 0 {
        return None;
    }
    let name = &body[..name_len];
    let after = &body[name_len..];
    let prefix = 1 + usize::from(closing) + name_len;
    if after.starts_with('>') {
        let opener = Opener::Tag(name.to_string());
        let lexeme = if closing {
            Lexeme::Close(opener)
        } else {
            Lexeme::Open(opener)
        };
        Some((lexeme, prefix + 1))
    } else if !closing && after.starts_with("/>") {
        Some((Lexeme::Token(format!("<{name}/>")), prefix + 2))
    } else {
        None
    }
}
