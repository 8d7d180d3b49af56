use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(PhysicianId);
string_id!(QualificationId);
string_id!(
    /// Identifier of a duty or shift template.
    TemplateId
);
string_id!(
    /// Identifier of a concrete duty or shift occurrence, `"{template}@{date}"`.
    InstanceId
);
string_id!(BlockId);
string_id!(PoolId);
string_id!(WeeklySetId);

impl InstanceId {
    pub fn of(template: &TemplateId, date: NaiveDate) -> Self {
        Self(format!("{}@{}", template.0, date.format("%Y-%m-%d")))
    }
}
