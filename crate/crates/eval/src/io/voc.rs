//! PASCAL VOC page annotations.

use roxmltree::{Document, Node};

use tablegrid_core::document::PageAnnotation;
use tablegrid_core::graph::{ClassLabel, PageObject};

use super::{bbox_from, IoError};

/// What to do with an object whose name is not one of the sixteen classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClassPolicy {
    /// Fail with [`IoError::UnknownClassName`].
    #[default]
    Strict,
    /// Drop the object and report its name.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VocPage {
    /// Objects only; words and relations come from the sidecars.
    pub annotation: PageAnnotation,
    /// Names of objects dropped under [`ClassPolicy::Lenient`].
    pub unknown_classes: Vec<String>,
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(name))
}

fn child_text<'a>(node: Node<'a, '_>, name: &str) -> Option<&'a str> {
    child(node, name).and_then(|n| n.text()).map(str::trim)
}

fn number(node: Node, name: &str) -> Result<f64, IoError> {
    let text =
        child_text(node, name).ok_or_else(|| IoError::schema(format!("missing <{name}>")))?;
    text.parse()
        .map_err(|_| IoError::schema(format!("<{name}> is not a number: {text:?}")))
}

pub fn read_voc_annotation(xml: &[u8], policy: ClassPolicy) -> Result<VocPage, IoError> {
    let text = std::str::from_utf8(xml).map_err(|e| IoError::XmlMalformed(e.to_string()))?;
    let doc = Document::parse(text).map_err(|e| IoError::XmlMalformed(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name("annotation") {
        return Err(IoError::schema(format!(
            "root element is <{}>, expected <annotation>",
            root.tag_name().name()
        )));
    }

    let mut page = VocPage::default();
    let image = child_text(root, "filename").unwrap_or_default();
    page.annotation.image_id = image
        .rsplit_once('.')
        .map_or(image, |(stem, _)| stem)
        .to_string();
    if let Some(size) = child(root, "size") {
        page.annotation.page_size = (number(size, "width")?, number(size, "height")?);
    }

    for object in root.children().filter(|n| n.has_tag_name("object")) {
        let name =
            child_text(object, "name").ok_or_else(|| IoError::schema("object without <name>"))?;
        let Some(class) = ClassLabel::from_name(name) else {
            match policy {
                ClassPolicy::Strict => return Err(IoError::UnknownClassName(name.to_string())),
                ClassPolicy::Lenient => {
                    page.unknown_classes.push(name.to_string());
                    continue;
                }
            }
        };
        let bndbox = child(object, "bndbox")
            .ok_or_else(|| IoError::schema(format!("object {name:?} without <bndbox>")))?;
        let bbox = bbox_from([
            number(bndbox, "xmin")?,
            number(bndbox, "ymin")?,
            number(bndbox, "xmax")?,
            number(bndbox, "ymax")?,
        ])?;
        let mut obj = PageObject::new(class, bbox);
        if let Some(score) = child_text(object, "score") {
            obj.score = Some(
                score
                    .parse()
                    .map_err(|_| IoError::schema(format!("score is not a number: {score:?}")))?,
            );
        }
        page.annotation.objects.push(obj);
    }
    Ok(page)
}
