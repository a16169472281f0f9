use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::decimal::Decimal;
use crate::error::CoreError;

/// Object of a knowledge-graph triple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Entity(String),
    Number(Decimal),
    /// ISO-8601 calendar date (`YYYY-MM-DD`). Stored as the validated
    /// string; lexicographic comparison of this form is chronological.
    Date(String),
    Text(String),
}

impl Value {
    pub fn entity(name: impl Into<String>) -> crate::Result<Value> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(CoreError::Value("entity name is empty".into()));
        }
        Ok(Value::Entity(name))
    }

    pub fn number(lit: &str) -> crate::Result<Value> {
        Ok(Value::Number(lit.parse()?))
    }

    pub fn date(iso: impl Into<String>) -> crate::Result<Value> {
        let iso = iso.into();
        validate_date(&iso)?;
        Ok(Value::Date(iso))
    }

    pub fn text(t: impl Into<String>) -> crate::Result<Value> {
        let t = t.into();
        if t.trim().is_empty() {
            return Err(CoreError::Value("text value is empty".into()));
        }
        Ok(Value::Text(t))
    }

    /// Canonical string rendering, shared by fact serialization and answers.
    pub fn render(&self) -> String {
        match self {
            Value::Entity(s) | Value::Date(s) | Value::Text(s) => s.clone(),
            Value::Number(d) => d.to_string(),
        }
    }

    pub fn otype(&self) -> &'static str {
        match self {
            Value::Entity(_) => "entity",
            Value::Number(_) => "number",
            Value::Date(_) => "date",
            Value::Text(_) => "text",
        }
    }

    pub fn from_parts(otype: &str, raw: &str) -> crate::Result<Value> {
        match otype {
            "entity" => Value::entity(raw),
            "number" => Value::number(raw),
            "date" => Value::date(raw),
            "text" => Value::text(raw),
            other => Err(CoreError::Value(format!("unknown otype {other:?}"))),
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        match self {
            Value::Entity(s) if s.trim().is_empty() => {
                Err(CoreError::Value("entity name is empty".into()))
            }
            Value::Text(s) if s.trim().is_empty() => {
                Err(CoreError::Value("text value is empty".into()))
            }
            Value::Date(s) => validate_date(s),
            _ => Ok(()),
        }
    }
}

pub(crate) fn validate_date(iso: &str) -> crate::Result<()> {
    chrono::NaiveDate::parse_from_str(iso, "%Y-%m-%d")
        .map_err(|_| CoreError::Date(iso.to_string()))?;
    // chrono accepts some non-canonical paddings; require the exact
    // zero-padded ISO form so lexicographic order is chronological.
    if iso.len() != 10 {
        return Err(CoreError::Date(iso.to_string()));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ValueRepr<'a> {
    otype: &'a str,
    o: String,
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ValueRepr { otype: self.otype(), o: self.render() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Owned {
            otype: String,
            o: String,
        }
        let r = Owned::deserialize(d)?;
        Value::from_parts(&r.otype, &r.o).map_err(D::Error::custom)
    }
}
