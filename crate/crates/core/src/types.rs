use std::fmt;
use std::str::FromStr;

/// The closed set of attribute types a stored value can be checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueType {
    String,
    Char,
    Int,
}

impl ValueType {
    pub fn name(self) -> &'static str {
        match self {
            ValueType::String => "String",
            ValueType::Char => "char",
            ValueType::Int => "int",
        }
    }

    /// Type check for a stored value; `None` is the null value and conforms
    /// to every type.
    pub fn conforms(self, value: Option<&str>) -> bool {
        let Some(v) = value else { return true };
        match self {
            ValueType::String => true,
            ValueType::Char => v.chars().count() == 1,
            ValueType::Int => {
                let digits = v.strip_prefix(['+', '-']).unwrap_or(v);
                !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
            }
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown type `{0}` (expected String, char or int)")]
pub struct UnknownType(pub String);

impl FromStr for ValueType {
    type Err = UnknownType;

    fn from_str(s: &str) -> Result<Self, UnknownType> {
        match s {
            "String" => Ok(ValueType::String),
            "char" => Ok(ValueType::Char),
            "int" => Ok(ValueType::Int),
            other => Err(UnknownType(other.to_string())),
        }
    }
}
