use std::collections::HashMap;
use std::str::FromStr;

use csv::StringRecord;

use crate::error::{Error, Result};

/// Header-indexed access to CSV records with row-level error reporting.
pub(crate) struct Columns {
    file: String,
    index: HashMap<String, usize>,
}

impl Columns {
    pub fn new(file: &str, headers: &StringRecord, required: &[&str]) -> Result<Self> {
        let index: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_owned(), i))
            .collect();
        if let Some(missing) = required.iter().find(|c| !index.contains_key(**c)) {
            return Err(Error::Parse {
                file: file.to_owned(),
                row: 1,
                field: (*missing).to_owned(),
                message: "missing column in header".into(),
            });
        }
        Ok(Self {
            file: file.to_owned(),
            index,
        })
    }

    pub fn row(record: &StringRecord) -> u64 {
        record.position().map_or(0, |p| p.line())
    }

    pub fn error(&self, record: &StringRecord, field: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            file: self.file.clone(),
            row: Self::row(record),
            field: field.to_owned(),
            message: message.into(),
        }
    }

    pub fn str<'r>(&self, record: &'r StringRecord, field: &str) -> &'r str {
        self.index
            .get(field)
            .and_then(|&i| record.get(i))
            .map_or("", str::trim)
    }

    pub fn required(&self, record: &StringRecord, field: &str) -> Result<String> {
        let v = self.str(record, field);
        if v.is_empty() {
            Err(self.error(record, field, "empty value"))
        } else {
            Ok(v.to_owned())
        }
    }

    pub fn optional(&self, record: &StringRecord, field: &str) -> Option<String> {
        let v = self.str(record, field);
        (!v.is_empty()).then(|| v.to_owned())
    }

    pub fn parse<T>(&self, record: &StringRecord, field: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        let v = self.str(record, field);
        v.parse()
            .map_err(|e| self.error(record, field, format!("cannot parse `{v}`: {e}")))
    }
}

/// Shortest round-trip decimal representation of a float.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
