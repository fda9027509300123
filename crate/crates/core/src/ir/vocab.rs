use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Layout domain. Each domain has its own closed element vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    #[serde(rename = "webui")]
    WebUi,
    Rico,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::WebUi => "webui",
            Domain::Rico => "rico",
        }
    }

    pub fn vocabulary(self) -> &'static TypeVocabulary {
        match self {
            Domain::WebUi => TypeVocabulary::webui(),
            Domain::Rico => TypeVocabulary::rico(),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "webui" | "web" => Ok(Domain::WebUi),
            "rico" => Ok(Domain::Rico),
            other => Err(format!("unknown domain `{other}` (expected webui or rico)")),
        }
    }
}

/// An element type name. Multi-word names ("background image") are one token.
///
/// Values are only handed out by a [`TypeVocabulary`], so holding one means the
/// name was a vocabulary member at construction time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ElementType(String);

impl ElementType {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The type that real pages layer other content on top of.
    pub fn is_background(&self) -> bool {
        self.0 == BACKGROUND_IMAGE
    }
}

impl fmt::Display for ElementType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) const BACKGROUND_IMAGE: &str = "background image";

const WEBUI_TYPES: [&str; 11] =
    ["text", "link", "button", "title", "description", "submit", "image", "background image", "icon", "logo", "input"];

const RICO_TYPES: [&str; 25] = [
    "text",
    "image",
    "icon",
    "list item",
    "text button",
    "toolbar",
    "web view",
    "input",
    "card",
    "advertisement",
    "background image",
    "drawer",
    "radio button",
    "checkbox",
    "multi-tab",
    "pager indicator",
    "modal",
    "on/off switch",
    "slider",
    "map view",
    "button bar",
    "video",
    "bottom navigation",
    "number stepper",
    "date picker",
];

/// Closed, ordered set of element types for one domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeVocabulary {
    domain_name: String,
    types: Vec<ElementType>,
}

impl TypeVocabulary {
    /// Builds a vocabulary, rejecting duplicate or empty names.
    pub fn new<I, S>(domain_name: impl Into<String>, names: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut types: Vec<ElementType> = Vec::new();
        for name in names {
            let name: String = name.into();
            let name = name.trim().to_string();
            if name.is_empty() {
                return Err("empty element type name".into());
            }
            if name.contains(['[', ']', '|', '"', ':']) {
                return Err(format!("element type `{name}` contains a reserved character"));
            }
            if types.iter().any(|t| t.0 == name) {
                return Err(format!("duplicate element type `{name}`"));
            }
            types.push(ElementType(name));
        }
        Ok(TypeVocabulary { domain_name: domain_name.into(), types })
    }

    pub fn webui() -> &'static TypeVocabulary {
        static V: std::sync::OnceLock<TypeVocabulary> = std::sync::OnceLock::new();
        V.get_or_init(|| TypeVocabulary::new("webui", WEBUI_TYPES).expect("static vocabulary"))
    }

    pub fn rico() -> &'static TypeVocabulary {
        static V: std::sync::OnceLock<TypeVocabulary> = std::sync::OnceLock::new();
        V.get_or_init(|| TypeVocabulary::new("rico", RICO_TYPES).expect("static vocabulary"))
    }

    pub fn domain_name(&self) -> &str {
        &self.domain_name
    }

    pub fn types(&self) -> &[ElementType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&ElementType> {
        self.types.iter().find(|t| t.0 == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.get(name).is_some()
    }

    pub fn index_of(&self, ty: &ElementType) -> Option<usize> {
        self.types.iter().position(|t| t == ty)
    }
}
