//! Raw touch-event log parsing and cleaning.
//!
//! A log holds one event per line with eight whitespace- or tab-delimited
//! fields. An optional header row names the columns; without one the
//! default order is
//! `Timestamp X Y ButtonTouch WidthMajor Orientation Pressure Finger`.
//! Lines that are malformed or contain a null field are skipped and recorded
//! as [`Diagnostic`]s, never dropped silently.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use crate::seed::shuffle_rows;

/// Events a finger stream needs to yield one full gesture after the
/// three-event derivative warm-up.
pub const MIN_STREAM_EVENTS: usize = 14;

const NULL_TOKENS: &[&str] = &["", "null", "none", "nan", "na", "n/a"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Finger {
    Zero = 0,
    One = 1,
}

impl Finger {
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Finger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ButtonState {
    Down,
    Held,
    Up,
    /// Device-specific token, kept verbatim.
    Other(String),
}

impl ButtonState {
    fn parse(token: &str) -> Self {
        match token.to_ascii_uppercase().as_str() {
            "DOWN" => ButtonState::Down,
            "HELD" => ButtonState::Held,
            "UP" => ButtonState::Up,
            _ => ButtonState::Other(token.to_string()),
        }
    }
}

impl fmt::Display for ButtonState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ButtonState::Down => f.write_str("DOWN"),
            ButtonState::Held => f.write_str("HELD"),
            ButtonState::Up => f.write_str("UP"),
            ButtonState::Other(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TouchEvent {
    pub timestamp: f64,
    pub x: f64,
    pub y: f64,
    pub button: ButtonState,
    pub width_major: f64,
    pub orientation: f64,
    pub pressure: f64,
    pub finger: Finger,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Timestamp,
    X,
    Y,
    ButtonTouch,
    WidthMajor,
    Orientation,
    Pressure,
    Finger,
}

impl Field {
    pub const ALL: [Field; 8] = [
        Field::Timestamp,
        Field::X,
        Field::Y,
        Field::ButtonTouch,
        Field::WidthMajor,
        Field::Orientation,
        Field::Pressure,
        Field::Finger,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Timestamp => "timestamp",
            Field::X => "x",
            Field::Y => "y",
            Field::ButtonTouch => "button_touch",
            Field::WidthMajor => "width_major",
            Field::Orientation => "orientation",
            Field::Pressure => "pressure",
            Field::Finger => "finger",
        }
    }

    fn header_label(self) -> &'static str {
        match self {
            Field::Timestamp => "Timestamp",
            Field::X => "X",
            Field::Y => "Y",
            Field::ButtonTouch => "ButtonTouch",
            Field::WidthMajor => "WidthMajor",
            Field::Orientation => "Orientation",
            Field::Pressure => "Pressure",
            Field::Finger => "Finger",
        }
    }

    /// Matches a column label case-insensitively, ignoring spaces,
    /// underscores and dashes.
    fn from_label(label: &str) -> Option<Field> {
        let norm: String = label.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect();
        Some(match norm.as_str() {
            "timestamp" | "time" => Field::Timestamp,
            "x" => Field::X,
            "y" => Field::Y,
            "buttontouch" => Field::ButtonTouch,
            "widthmajor" => Field::WidthMajor,
            "orientation" => Field::Orientation,
            "pressure" => Field::Pressure,
            "finger" => Field::Finger,
            _ => return None,
        })
    }
}

/// Column layout of a log file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldOrder([Field; 8]);

impl Default for FieldOrder {
    fn default() -> Self {
        FieldOrder(Field::ALL)
    }
}

impl FieldOrder {
    pub fn new(fields: [Field; 8]) -> Result<Self> {
        for f in Field::ALL {
            if !fields.contains(&f) {
                return Err(Error::Config(format!("field order is missing '{}'", f.name())));
            }
        }
        Ok(FieldOrder(fields))
    }

    pub fn fields(&self) -> &[Field; 8] {
        &self.0
    }

    /// Parses a header row. Multi-word labels such as `Button Touch` may be
    /// split across whitespace-delimited tokens.
    pub fn from_header(line: &str) -> Result<Self> {
        let tokens: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).filter(|t| !t.is_empty()).collect()
        } else {
            line.split_whitespace().collect()
        };
        let mut fields = Vec::with_capacity(8);
        let mut pending = String::new();
        for tok in tokens {
            if !pending.is_empty() {
                pending.push(' ');
            }
            pending.push_str(tok);
            if let Some(f) = Field::from_label(&pending) {
                fields.push(f);
                pending.clear();
            } else if pending.split(' ').count() >= 2 {
                return Err(Error::Format(format!("unknown header column '{pending}'")));
            }
        }
        if !pending.is_empty() {
            return Err(Error::Format(format!("unknown header column '{pending}'")));
        }
        let arr: [Field; 8] = fields
            .try_into()
            .map_err(|v: Vec<Field>| Error::Format(format!("header names {} columns, expected 8", v.len())))?;
        FieldOrder::new(arr).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn header_line(&self) -> String {
        self.0.iter().map(|f| f.header_label()).collect::<Vec<_>>().join("\t")
    }
}

impl FromStr for FieldOrder {
    type Err = Error;

    /// Comma-separated column names, e.g. `timestamp,x,y,button_touch,...`.
    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<Field> = s
            .split(',')
            .map(|name| {
                Field::from_label(name.trim())
                    .ok_or_else(|| Error::Config(format!("unknown field name '{}'", name.trim())))
            })
            .collect::<Result<_>>()?;
        let arr: [Field; 8] = fields
            .try_into()
            .map_err(|v: Vec<Field>| Error::Config(format!("field order names {} columns, expected 8", v.len())))?;
        FieldOrder::new(arr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    /// The line produced no event.
    Skipped,
    /// The line produced an event but something about it was unusual.
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based line number; 0 for file-level notes.
    pub line: usize,
    pub severity: Severity,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedLog {
    pub events: Vec<TouchEvent>,
    pub diagnostics: Vec<Diagnostic>,
    /// Layout used for the data lines.
    pub order: FieldOrder,
    pub had_header: bool,
}

impl ParsedLog {
    pub fn skipped(&self) -> usize {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Skipped).count()
    }
}

fn looks_like_header(line: &str) -> bool {
    line.split_whitespace()
        .next()
        .is_some_and(|t| t.parse::<f64>().is_err() && !NULL_TOKENS.contains(&t.to_ascii_lowercase().as_str()))
}

/// Splits a data line into fields. Runs of whitespace normally act as one
/// delimiter; when that does not yield eight fields, single tab or space
/// characters are used so that an empty field shows up as a null.
fn split_fields(line: &str) -> Vec<&str> {
    let collapsed: Vec<&str> = line.split_whitespace().collect();
    if collapsed.len() == 8 {
        return collapsed;
    }
    let delim = if line.contains('\t') { '\t' } else { ' ' };
    let strict: Vec<&str> = line.split(delim).map(str::trim).collect();
    if strict.len() == 8 {
        strict
    } else {
        collapsed
    }
}

/// Parses one data line. Returns the event plus an optional warning, or the
/// reason the line was skipped.
fn parse_line(line: &str, order: &FieldOrder) -> std::result::Result<(TouchEvent, Option<String>), String> {
    let tokens = split_fields(line);
    if tokens.len() != 8 {
        return Err(format!("expected 8 fields, found {}", tokens.len()));
    }
    let nulls: Vec<&str> = order
        .fields()
        .iter()
        .zip(&tokens)
        .filter(|(_, t)| NULL_TOKENS.contains(&t.to_ascii_lowercase().as_str()))
        .map(|(f, _)| f.name())
        .collect();
    if !nulls.is_empty() {
        return Err(format!("null field: {}", nulls.join(", ")));
    }

    let mut ev = TouchEvent {
        timestamp: 0.0,
        x: 0.0,
        y: 0.0,
        button: ButtonState::Held,
        width_major: 0.0,
        orientation: 0.0,
        pressure: 0.0,
        finger: Finger::Zero,
    };
    let mut warning = None;
    for (field, tok) in order.fields().iter().zip(&tokens) {
        if *field == Field::ButtonTouch {
            ev.button = ButtonState::parse(tok);
            if let ButtonState::Other(raw) = &ev.button {
                warning = Some(format!("unrecognized button_touch token '{raw}' kept"));
            }
            continue;
        }
        let v: f64 = tok
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| format!("invalid {}: '{tok}'", field.name()))?;
        match field {
            Field::Timestamp if v < 0.0 => return Err(format!("invalid timestamp: '{tok}' is negative")),
            Field::Timestamp => ev.timestamp = v,
            Field::X => ev.x = v,
            Field::Y => ev.y = v,
            Field::WidthMajor => ev.width_major = v,
            Field::Orientation => ev.orientation = v,
            Field::Pressure => ev.pressure = v,
            Field::Finger => {
                ev.finger = if v == 0.0 {
                    Finger::Zero
                } else if v == 1.0 {
                    Finger::One
                } else {
                    return Err(format!("invalid finger: '{tok}' (expected 0 or 1)"));
                }
            }
            Field::ButtonTouch => unreachable!(),
        }
    }
    Ok((ev, warning))
}

/// Parses log text.
///
/// A header row, when present, decides the column order; otherwise
/// `default_order` is used. An unknown header column is fatal. Bad data
/// lines become diagnostics.
pub fn parse_log(text: &str, default_order: &FieldOrder) -> Result<ParsedLog> {
    let mut out = ParsedLog { order: *default_order, ..Default::default() };
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if !seen_content {
            seen_content = true;
            if looks_like_header(line) {
                out.order = FieldOrder::from_header(line)?;
                out.had_header = true;
                continue;
            }
        }
        match parse_line(line, &out.order) {
            Ok((ev, warning)) => {
                if let Some(reason) = warning {
                    out.diagnostics.push(Diagnostic { line: line_no, severity: Severity::Warning, reason });
                }
                out.events.push(ev);
            }
            Err(reason) => out.diagnostics.push(Diagnostic { line: line_no, severity: Severity::Skipped, reason }),
        }
    }
    Ok(out)
}

pub fn read_log(path: &Path, default_order: &FieldOrder) -> Result<ParsedLog> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    parse_log(&text, default_order)
}

/// Serializes events in `order`, preceded by a header row. Numbers are
/// written in shortest round-trip form, so parsing the output reproduces
/// every value exactly.
pub fn write_log(events: &[TouchEvent], order: &FieldOrder) -> String {
    let mut out = order.header_line();
    out.push('\n');
    for ev in events {
        let cols: Vec<String> = order
            .fields()
            .iter()
            .map(|f| match f {
                Field::Timestamp => ev.timestamp.to_string(),
                Field::X => ev.x.to_string(),
                Field::Y => ev.y.to_string(),
                Field::ButtonTouch => ev.button.to_string(),
                Field::WidthMajor => ev.width_major.to_string(),
                Field::Orientation => ev.orientation.to_string(),
                Field::Pressure => ev.pressure.to_string(),
                Field::Finger => ev.finger.to_string(),
            })
            .collect();
        out.push_str(&cols.join("\t"));
        out.push('\n');
    }
    out
}

/// Diagnostics as CSV with header `line,reason`.
pub fn diagnostics_csv(diags: &[Diagnostic]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["line", "reason"])?;
    for d in diags {
        w.write_record([d.line.to_string(), d.reason.clone()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerStream {
    pub finger: Finger,
    pub events: Vec<TouchEvent>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CleanedStreams {
    /// Non-empty streams, finger 0 first.
    pub streams: Vec<FingerStream>,
    /// Events removed because their timestamp did not advance the stream.
    pub dropped: usize,
    pub warnings: Vec<String>,
}

impl CleanedStreams {
    pub fn event_count(&self) -> usize {
        self.streams.iter().map(|s| s.events.len()).sum()
    }
}

/// Partitions events by finger, sorts each finger by timestamp, and keeps
/// only the first event of any run whose timestamp does not strictly
/// increase.
pub fn clean_stream(events: Vec<TouchEvent>) -> CleanedStreams {
    let mut by_finger: [Vec<TouchEvent>; 2] = [Vec::new(), Vec::new()];
    for ev in events {
        by_finger[ev.finger.index()].push(ev);
    }
    let mut out = CleanedStreams::default();
    for (idx, mut evs) in by_finger.into_iter().enumerate() {
        if evs.is_empty() {
            continue;
        }
        let finger = if idx == 0 { Finger::Zero } else { Finger::One };
        evs.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        let before = evs.len();
        let mut kept: Vec<TouchEvent> = Vec::with_capacity(before);
        for ev in evs {
            if kept.last().is_none_or(|last| ev.timestamp > last.timestamp) {
                kept.push(ev);
            }
        }
        out.dropped += before - kept.len();
        if kept.len() < MIN_STREAM_EVENTS {
            out.warnings.push(format!(
                "finger {finger} stream has {} events, fewer than the {MIN_STREAM_EVENTS} needed for one gesture",
                kept.len()
            ));
        }
        out.streams.push(FingerStream { finger, events: kept });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Game {
    Pubg,
    Diepio,
    Slither,
    Minecraft,
}

impl Game {
    pub const ALL: [Game; 4] = [Game::Pubg, Game::Diepio, Game::Slither, Game::Minecraft];

    pub fn as_str(self) -> &'static str {
        match self {
            Game::Pubg => "PUBG",
            Game::Diepio => "DIEPIO",
            Game::Slither => "SLITHER",
            Game::Minecraft => "MINECRAFT",
        }
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Game {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect();
        match norm.as_str() {
            "pubg" => Ok(Game::Pubg),
            "diepio" | "diep" => Ok(Game::Diepio),
            "slither" | "slitherio" => Ok(Game::Slither),
            "minecraft" => Ok(Game::Minecraft),
            _ => Err(Error::Config(format!("unknown game '{s}'"))),
        }
    }
}

/// Splits a `<user_id>_<game>.txt` file name.
pub fn parse_log_name(path: &Path) -> Result<(String, Game)> {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::Config(format!("bad log file name {}", path.display())))?;
    let (user, game) = stem
        .rsplit_once('_')
        .ok_or_else(|| Error::Config(format!("log file name '{stem}' is not <user_id>_<game>")))?;
    if user.is_empty() {
        return Err(Error::Config(format!("log file name '{stem}' has an empty user id")));
    }
    Ok((user.to_string(), game.parse()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserLog {
    pub user_id: String,
    pub game: Game,
    pub streams: Vec<FingerStream>,
}

impl UserLog {
    pub fn new(user_id: impl Into<String>, game: Game, streams: Vec<FingerStream>) -> Result<Self> {
        let user_id = user_id.into();
        if user_id.is_empty() {
            return Err(Error::Config("user id must be non-empty".into()));
        }
        if streams.len() == 2 && streams[0].finger == streams[1].finger || streams.len() > 2 {
            return Err(Error::Contract("at most one stream per finger".into()));
        }
        Ok(UserLog { user_id, game, streams })
    }
}
