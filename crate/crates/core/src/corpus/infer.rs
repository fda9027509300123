use super::ElementTreeNode;
use crate::ir::{Domain, ElementType, TypeVocabulary};

/// Element type of a node, or `None` for structural containers.
///
/// An explicit `type` always wins. Otherwise WebUI nodes go through the tag
/// rule table below and RICO nodes are looked up by normalized component name.
///
/// | condition                                        | type             |
/// |--------------------------------------------------|------------------|
/// | `h1`..`h6`                                       | title            |
/// | `a`                                              | link             |
/// | `button`/`input` with `type=submit`              | submit           |
/// | `button`                                         | button           |
/// | `input`, `textarea`, `select`                    | input            |
/// | `img` or `src`, with "logo" in class/id/alt      | logo             |
/// | `img` or `src`, with "icon" in class/id          | icon             |
/// | `img` or `src`                                   | image            |
/// | `i`, `svg`, or "icon" in class                   | icon             |
/// | `background-image` in style                      | background image |
/// | `p`                                              | description      |
/// | `span`, `label`, `small`, `strong`, `em`, `b`    | text             |
pub fn infer_element_type(node: &ElementTreeNode, domain: Domain) -> Option<ElementType> {
    if let Some(t) = &node.etype {
        return Some(t.clone());
    }
    match domain {
        Domain::WebUi => webui_rule(node).and_then(|n| TypeVocabulary::webui().get(n).cloned()),
        Domain::Rico => {
            let name = node.tag.trim().to_lowercase().replace('_', " ");
            TypeVocabulary::rico().get(&name).cloned()
        }
    }
}

fn attr_contains(node: &ElementTreeNode, keys: &[&str], needle: &str) -> bool {
    keys.iter().filter_map(|k| node.attrs.get(*k)).any(|v| v.to_ascii_lowercase().contains(needle))
}

fn webui_rule(node: &ElementTreeNode) -> Option<&'static str> {
    let tag = node.tag.to_ascii_lowercase();
    let tag = tag.as_str();
    if matches!(tag, "h1" | "h2" | "h3" | "h4" | "h5" | "h6") {
        return Some("title");
    }
    if tag == "a" {
        return Some("link");
    }
    let is_submit = node.attrs.get("type").is_some_and(|t| t.eq_ignore_ascii_case("submit"));
    if matches!(tag, "button" | "input") && is_submit {
        return Some("submit");
    }
    if tag == "button" {
        return Some("button");
    }
    if matches!(tag, "input" | "textarea" | "select") {
        return Some("input");
    }
    if tag == "img" || node.attrs.contains_key("src") {
        if attr_contains(node, &["class", "id", "alt"], "logo") {
            return Some("logo");
        }
        if attr_contains(node, &["class", "id"], "icon") {
            return Some("icon");
        }
        return Some("image");
    }
    if matches!(tag, "i" | "svg") || attr_contains(node, &["class"], "icon") {
        return Some("icon");
    }
    if attr_contains(node, &["style"], "background-image") {
        return Some("background image");
    }
    match tag {
        "p" => Some("description"),
        "span" | "label" | "small" | "strong" | "em" | "b" => Some("text"),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::BBox;

    fn node(tag: &str) -> ElementTreeNode {
        ElementTreeNode::new(tag, BBox::new(0.0, 0.0, 1.0, 1.0))
    }

    fn web(n: &ElementTreeNode) -> Option<String> {
        infer_element_type(n, Domain::WebUi).map(|t| t.as_str().to_string())
    }

    #[test]
    fn webui_rules() {
        assert_eq!(web(&node("h1")).as_deref(), Some("title"));
        assert_eq!(web(&node("H3")).as_deref(), Some("title"));
        assert_eq!(web(&node("a")).as_deref(), Some("link"));
        assert_eq!(web(&node("div")).as_deref(), None);
        assert_eq!(web(&node("li")).as_deref(), None);
        assert_eq!(web(&node("button")).as_deref(), Some("button"));
        assert_eq!(web(&node("button").with_attr("type", "submit")).as_deref(), Some("submit"));
        assert_eq!(web(&node("input")).as_deref(), Some("input"));
        assert_eq!(web(&node("img")).as_deref(), Some("image"));
        assert_eq!(web(&node("div").with_attr("src", "x.png")).as_deref(), Some("image"));
        assert_eq!(web(&node("img").with_attr("class", "site-Logo")).as_deref(), Some("logo"));
        assert_eq!(web(&node("img").with_attr("class", "icon-small")).as_deref(), Some("icon"));
        assert_eq!(web(&node("svg")).as_deref(), Some("icon"));
        assert_eq!(
            web(&node("div").with_attr("style", "background-image: url(a)")).as_deref(),
            Some("background image")
        );
        assert_eq!(web(&node("p")).as_deref(), Some("description"));
        assert_eq!(web(&node("span")).as_deref(), Some("text"));
    }

    #[test]
    fn explicit_type_wins() {
        let t = TypeVocabulary::webui().get("logo").unwrap().clone();
        let n = ElementTreeNode::typed("h1", t.clone(), BBox::new(0.0, 0.0, 1.0, 1.0));
        assert_eq!(infer_element_type(&n, Domain::WebUi), Some(t));
    }

    #[test]
    fn rico_lookup() {
        let r = |tag: &str| infer_element_type(&node(tag), Domain::Rico).map(|t| t.as_str().to_string());
        assert_eq!(r("Pager_Indicator").as_deref(), Some("pager indicator"));
        assert_eq!(r("Text Button").as_deref(), Some("text button"));
        assert_eq!(r("Icon").as_deref(), Some("icon"));
        assert_eq!(r("LinearLayout"), None);
    }
}
