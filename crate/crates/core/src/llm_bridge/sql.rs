//! Parser for the restricted query grammar models are asked to emit:
//!
//! ```text
//! SELECT * FROM item WHERE category = '<c>'
//!     [AND <facet> LIKE '%<v>%' | AND (<facet> LIKE '%<v>%' OR ...)]*
//!     LIMIT <n> [;]
//! ```
//!
//! Keywords are case-insensitive; conjuncts may come in any order. `LIKE`
//! without `%` and `=` compare exactly.

use crate::catalog::{fold, Catalog, FacetId, MatchMode, StructuredQuery};

/// Grammar name bound to the `{dialect}` prompt slot.
pub const DIALECT: &str = "restricted SQLite-style";

/// Column list bound to the `{schema}` prompt slot.
pub fn schema_description() -> String {
    let mut cols = vec!["id TEXT".to_string(), "title TEXT".to_string()];
    cols.extend(FacetId::ALL.iter().map(|f| format!("{} TEXT", f.as_str())));
    format!("item({})", cols.join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid query: {reason}")]
pub struct InvalidSql {
    pub reason: String,
}

fn invalid(reason: impl Into<String>) -> InvalidSql {
    InvalidSql { reason: reason.into() }
}

/// Result of checking and executing a model-written query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SqlOutcome {
    Valid { query: StructuredQuery, rows: usize },
    /// Parsed but matched no items.
    Trivial { query: StructuredQuery },
    Invalid { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Str(String),
    Num(u64),
    Sym(char),
}

fn lex(text: &str) -> Result<Vec<Tok>, InvalidSql> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '\'' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(invalid("unterminated string literal")),
                    Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                        s.push('\'');
                        i += 2;
                    }
                    Some('\'') => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push(Tok::Str(s));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            out.push(Tok::Num(digits.parse().map_err(|_| invalid("number out of range"))?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Word(chars[start..i].iter().collect()));
        } else if "*=();".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else if c == '`' || c == '"' {
            // quoted identifier
            let close = c;
            let start = i + 1;
            i = start;
            while i < chars.len() && chars[i] != close {
                i += 1;
            }
            if i >= chars.len() {
                return Err(invalid("unterminated quoted identifier"));
            }
            out.push(Tok::Word(chars[start..i].iter().collect()));
            i += 1;
        } else {
            return Err(invalid(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), InvalidSql> {
        if self.is_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(invalid(format!("expected {kw}")))
        }
    }

    fn sym(&mut self, s: char) -> Result<(), InvalidSql> {
        match self.next() {
            Some(Tok::Sym(c)) if c == s => Ok(()),
            _ => Err(invalid(format!("expected `{s}`"))),
        }
    }

    /// `<column> (LIKE | =) '<value>'`
    fn predicate(&mut self) -> Result<(FacetId, String, MatchMode), InvalidSql> {
        let column = match self.next() {
            Some(Tok::Word(w)) => w,
            _ => return Err(invalid("expected a column name")),
        };
        let facet: FacetId = column.parse().map_err(|_| invalid(format!("unknown column `{column}`")))?;
        let like = if self.is_keyword("like") {
            self.pos += 1;
            true
        } else {
            self.sym('=')?;
            false
        };
        let raw = match self.next() {
            Some(Tok::Str(s)) => s,
            _ => return Err(invalid("expected a string literal")),
        };
        let wildcard = like && (raw.starts_with('%') || raw.ends_with('%'));
        let value = fold(raw.trim_matches('%'));
        if value.is_empty() || (like && value.contains(['%', '_'])) {
            return Err(invalid(format!("unsupported pattern `{raw}`")));
        }
        let mode = if wildcard { MatchMode::Substring } else { MatchMode::Exact };
        Ok((facet, value, mode))
    }
}

fn strip_wrapping(text: &str) -> &str {
    let mut t = text.trim();
    if let Some(rest) = t.strip_prefix("```") {
        let rest = rest.strip_prefix("sql").or_else(|| rest.strip_prefix("SQL")).unwrap_or(rest);
        t = rest.trim();
        if let Some(inner) = t.strip_suffix("```") {
            t = inner.trim();
        }
    }
    for label in ["SQL Query:", "SQL query:", "SQL:"] {
        if let Some(rest) = t.strip_prefix(label) {
            t = rest.trim();
        }
    }
    t
}

/// Parses model output into a structured query, or explains why it cannot.
pub fn validate_sql_like(text: &str) -> Result<StructuredQuery, InvalidSql> {
    let mut p = Parser { toks: lex(strip_wrapping(text))?, pos: 0 };
    p.keyword("select")?;
    p.sym('*')?;
    p.keyword("from")?;
    match p.next() {
        Some(Tok::Word(w)) if w.eq_ignore_ascii_case("item") => {}
        _ => return Err(invalid("only the `item` table may be queried")),
    }
    p.keyword("where")?;

    let mut category: Option<String> = None;
    let mut query = StructuredQuery::new("", 1);
    loop {
        let group: Vec<(FacetId, String, MatchMode)> = if matches!(p.peek(), Some(Tok::Sym('('))) {
            p.pos += 1;
            let mut preds = vec![p.predicate()?];
            while p.is_keyword("or") {
                p.pos += 1;
                preds.push(p.predicate()?);
            }
            p.sym(')')?;
            preds
        } else {
            vec![p.predicate()?]
        };

        let (facet, _, mode) = group[0].clone();
        if group.iter().any(|(f, _, m)| *f != facet || *m != mode) {
            return Err(invalid("an OR group must use one column and one operator"));
        }
        if facet == FacetId::Category {
            if category.is_some() || group.len() > 1 || mode != MatchMode::Exact {
                return Err(invalid("category must be a single exact comparison"));
            }
            category = Some(group[0].1.clone());
        } else {
            if query.constraints.iter().any(|c| c.facet == facet) {
                return Err(invalid(format!("column `{facet}` constrained more than once")));
            }
            query.add_values(facet, group.into_iter().map(|(_, v, _)| v), mode);
        }

        if p.is_keyword("and") {
            p.pos += 1;
        } else {
            break;
        }
    }
    p.keyword("limit")?;
    query.limit = match p.next() {
        Some(Tok::Num(n)) if n >= 1 => n as usize,
        _ => return Err(invalid("LIMIT needs a positive integer")),
    };
    if matches!(p.peek(), Some(Tok::Sym(';'))) {
        p.pos += 1;
    }
    if p.peek().is_some() {
        return Err(invalid("trailing tokens after LIMIT"));
    }
    query.category = category.ok_or_else(|| invalid("missing category condition"))?;
    Ok(query)
}

/// Renders a query in the restricted grammar; [`validate_sql_like`]
/// parses it back to an equal query.
pub fn to_sql(query: &StructuredQuery) -> String {
    let quote = |v: &str| v.replace('\'', "''");
    let mut sql = format!("SELECT * FROM item WHERE category='{}'", quote(&query.category));
    for c in &query.constraints {
        let preds: Vec<String> = c
            .values
            .iter()
            .map(|v| match c.mode {
                MatchMode::Substring => format!("{} LIKE '%{}%'", c.facet, quote(v)),
                MatchMode::Exact => format!("{} = '{}'", c.facet, quote(v)),
            })
            .collect();
        if preds.len() == 1 {
            sql.push_str(&format!(" AND {}", preds[0]));
        } else {
            sql.push_str(&format!(" AND ({})", preds.join(" OR ")));
        }
    }
    sql.push_str(&format!(" LIMIT {};", query.limit));
    sql
}

/// Parses and executes `text`, classifying it as valid, trivial or invalid.
pub fn classify_sql(text: &str, catalog: &Catalog) -> SqlOutcome {
    match validate_sql_like(text) {
        Err(e) => SqlOutcome::Invalid { reason: e.reason },
        Ok(query) => {
            let rows = catalog.execute(&query).len();
            if rows == 0 {
                SqlOutcome::Trivial { query }
            } else {
                SqlOutcome::Valid { query, rows }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_one_shot_example_output() {
        let q = validate_sql_like(
            "SELECT * From item WHERE category='Casual pants' AND material LIKE '% polyester fiber%' LIMIT 100;",
        )
        .unwrap();
        assert_eq!(q.category, "casual pants");
        assert_eq!(q.limit, 100);
        assert_eq!(q.constraints.len(), 1);
        assert_eq!(q.constraints[0].facet, FacetId::Material);
        assert_eq!(q.constraints[0].values, ["polyester fiber"]);
        assert_eq!(q.constraints[0].mode, MatchMode::Substring);
    }

    #[test]
    fn rejects_other_statements() {
        for bad in [
            "DROP TABLE item;",
            "SELECT * FROM users WHERE category='x' LIMIT 1",
            "SELECT id FROM item WHERE category='x' LIMIT 1",
            "SELECT * FROM item WHERE color LIKE '%red%' LIMIT 5",
            "SELECT * FROM item WHERE category='x' AND price < 10 LIMIT 5",
            "SELECT * FROM item WHERE category='x' LIMIT 0",
            "SELECT * FROM item WHERE category='x' LIMIT 5; DELETE FROM item",
            "SELECT * FROM item WHERE category='x",
        ] {
            assert!(validate_sql_like(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn or_groups_and_fences() {
        let q = validate_sql_like(
            "```sql\nselect * from item where color like '%red%' and category = 'Shoes' and (style LIKE '%casual%' OR style LIKE '%sport%') limit 20\n```",
        )
        .unwrap();
        assert_eq!(q.category, "shoes");
        assert_eq!(q.constraints.len(), 2);
        assert_eq!(q.constraints[1].values, ["casual", "sport"]);
        assert!(validate_sql_like("SELECT * FROM item WHERE category='a' AND color LIKE '%r%' AND color LIKE '%b%' LIMIT 3").is_err());
    }

    #[test]
    fn exact_forms() {
        let q = validate_sql_like("SELECT * FROM item WHERE category='a' AND brand = 'Feiyue' AND color LIKE 'Red' LIMIT 3").unwrap();
        assert!(q.constraints.iter().all(|c| c.mode == MatchMode::Exact));
        assert!(schema_description().contains("target_customer TEXT"));
    }

    #[test]
    fn render_round_trip() {
        let mut q = StructuredQuery::new("it's", 7);
        q.add_values(FacetId::Color, ["red".to_string(), "o'range".to_string()], MatchMode::Substring);
        q.add_values(FacetId::Brand, ["acme".to_string()], MatchMode::Exact);
        assert_eq!(validate_sql_like(&to_sql(&q)).unwrap(), q);
    }
}
