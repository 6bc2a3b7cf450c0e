//! Bijection between symbol strings and dense integer labels.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fst::Label;

pub const EPS_SYMBOL: &str = "<eps>";
pub const BLANK_SYMBOL: &str = "<blank>";

/// Id 0 is always `<eps>`. Emission tables also reserve id 1 for `<blank>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolTable {
    name: String,
    symbols: Vec<String>,
    ids: HashMap<String, Label>,
}

impl SymbolTable {
    /// A table holding only `<eps>`.
    pub fn new(name: impl Into<String>) -> Self {
        let mut table = SymbolTable {
            name: name.into(),
            symbols: Vec::new(),
            ids: HashMap::new(),
        };
        table.push(EPS_SYMBOL).expect("fresh table");
        table
    }

    /// Unit table for a vocabulary of `n_units` emission units including
    /// `<blank>`: `<eps>`=0, `<blank>`=1, then the language units named
    /// `A`..`Z` followed by `U26`, `U27`, ...
    pub fn units(n_units: usize) -> Self {
        let mut table = SymbolTable::new("units");
        table.push(BLANK_SYMBOL).expect("fresh table");
        for k in 0..n_units.saturating_sub(1) {
            table.push(&default_unit_name(k)).expect("unit names are unique");
        }
        table
    }

    /// Unit table built from explicit language-unit names (blank excluded).
    pub fn from_unit_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let mut table = SymbolTable::new("units");
        table.push(BLANK_SYMBOL)?;
        for name in names {
            table.push(name.as_ref())?;
        }
        Ok(table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Appends a symbol and returns its id.
    pub fn push(&mut self, symbol: &str) -> Result<Label> {
        if self.ids.contains_key(symbol) {
            return Err(Error::DuplicateSymbol(symbol.to_string()));
        }
        let id = self.symbols.len() as Label;
        self.symbols.push(symbol.to_string());
        self.ids.insert(symbol.to_string(), id);
        Ok(id)
    }

    /// Returns the id of `symbol`, adding it if absent.
    pub fn get_or_push(&mut self, symbol: &str) -> Label {
        match self.ids.get(symbol) {
            Some(&id) => id,
            None => self.push(symbol).expect("checked absent"),
        }
    }

    pub fn id(&self, symbol: &str) -> Option<Label> {
        self.ids.get(symbol).copied()
    }

    pub fn try_id(&self, symbol: &str) -> Result<Label> {
        self.id(symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn symbol(&self, id: Label) -> Option<&str> {
        self.symbols.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, &str)> {
        self.symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (i as Label, s.as_str()))
    }

    /// Same symbols under the same ids; the table name is ignored.
    pub fn same_symbols(&self, other: &SymbolTable) -> bool {
        self.symbols == other.symbols
    }

    /// Renders ids as space-separated symbols, skipping `<eps>`.
    pub fn render(&self, labels: &[Label]) -> String {
        labels
            .iter()
            .filter(|&&l| l != 0)
            .map(|&l| self.symbol(l).map(str::to_string).unwrap_or_else(|| l.to_string()))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Parses space-separated symbols into ids.
    pub fn parse_sequence(&self, text: &str) -> Result<Vec<Label>> {
        text.split_whitespace().map(|s| self.try_id(s)).collect()
    }

    /// `symbol<TAB>id` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, sym) in self.iter() {
            let _ = writeln!(out, "{sym}\t{id}");
        }
        out
    }

    /// Reads `symbol<TAB>id` lines. Ids must be dense and start at 0 with `<eps>`.
    pub fn from_text(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(sym), Some(id), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::parse(n + 1, "expected `symbol<TAB>id`"));
            };
            let id: usize = id
                .parse()
                .map_err(|_| Error::parse(n + 1, format!("bad id `{id}`")))?;
            entries.push((id, sym.to_string(), n + 1));
        }
        entries.sort_by_key(|e| e.0);
        let mut table = SymbolTable {
            name: name.into(),
            symbols: Vec::new(),
            ids: HashMap::new(),
        };
        for (expected, (id, sym, line)) in entries.into_iter().enumerate() {
            if id != expected {
                return Err(Error::parse(line, format!("ids must be dense, missing {expected}")));
            }
            table.push(&sym)?;
        }
        if table.symbol(0) != Some(EPS_SYMBOL) {
            return Err(Error::parse(1, "id 0 must be <eps>"));
        }
        Ok(table)
    }
}

fn default_unit_name(k: usize) -> String {
    if k < 26 {
        char::from(b'A' + k as u8).to_string()
    } else {
        format!("U{k}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_table_layout() {
        let t = SymbolTable::units(3);
        assert_eq!(t.len(), 4);
        assert_eq!(t.id("<eps>"), Some(0));
        assert_eq!(t.id("<blank>"), Some(1));
        assert_eq!(t.id("A"), Some(2));
        assert_eq!(t.id("B"), Some(3));
        assert_eq!(SymbolTable::units(30).symbol(28), Some("U26"));
    }

    #[test]
    fn text_round_trip() {
        let t = SymbolTable::units(5);
        let back = SymbolTable::from_text("units", &t.to_text()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn rejects_duplicates_and_gaps() {
        let mut t = SymbolTable::new("w");
        t.push("a").unwrap();
        assert!(matches!(t.push("a"), Err(Error::DuplicateSymbol(_))));
        assert!(SymbolTable::from_text("x", "<eps>\t0\nb\t2\n").is_err());
    }

    #[test]
    fn render_skips_epsilon() {
        let t = SymbolTable::units(3);
        assert_eq!(t.render(&[2, 0, 3]), "A B");
        assert_eq!(t.parse_sequence("A B A").unwrap(), vec![2, 3, 2]);
        assert!(t.parse_sequence("Q").is_err());
    }
}
