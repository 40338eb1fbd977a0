//! Plain-text extraction from PDF documents.

use lopdf::Document;
use pdf_extract::{MediaBox, OutputDev, OutputError, Transform};

use super::layout::{layout_text, Glyph, Page};
use super::IngestError;

/// Text of one document plus what the extractor saw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedText {
    pub text: String,
    pub pages: usize,
    /// Set when the document has pages but no extractable characters, e.g. a
    /// scanned or image-only file.
    pub no_text: bool,
}

#[derive(Default)]
struct Collector {
    pages: Vec<Page>,
    current: Option<Page>,
}

impl OutputDev for Collector {
    fn begin_page(
        &mut self,
        _page_num: u32,
        media_box: &MediaBox,
        _art_box: Option<(f64, f64, f64, f64)>,
    ) -> Result<(), OutputError> {
        self.current = Some(Page {
            width: media_box.urx - media_box.llx,
            height: media_box.ury - media_box.lly,
            glyphs: Vec::new(),
        });
        Ok(())
    }

    fn end_page(&mut self) -> Result<(), OutputError> {
        if let Some(p) = self.current.take() {
            self.pages.push(p);
        }
        Ok(())
    }

    fn output_character(
        &mut self,
        trm: &Transform,
        width: f64,
        _spacing: f64,
        font_size: f64,
        text: &str,
    ) -> Result<(), OutputError> {
        let Some(page) = self.current.as_mut() else {
            return Ok(());
        };
        let scale = (trm.m11 * trm.m22 - trm.m12 * trm.m21).abs().sqrt();
        let size = font_size * scale;
        page.glyphs.push(Glyph {
            x: trm.m31,
            y: page.height - trm.m32,
            width: width * size,
            size,
            text: text.to_string(),
        });
        Ok(())
    }

    fn begin_word(&mut self) -> Result<(), OutputError> {
        Ok(())
    }

    fn end_word(&mut self) -> Result<(), OutputError> {
        Ok(())
    }

    fn end_line(&mut self) -> Result<(), OutputError> {
        Ok(())
    }
}

/// Extracts running text in reading order. Figures and table structure are
/// not reconstructed; words hyphenated across lines are rejoined.
pub fn extract_text(document: &[u8]) -> Result<ExtractedText, IngestError> {
    let mut doc = Document::load_mem(document).map_err(|e| match e {
        lopdf::Error::Decryption(_) => IngestError::EncryptedDocument,
        other => IngestError::UnreadableDocument(other.to_string()),
    })?;
    if doc.is_encrypted() && doc.decrypt("").is_err() {
        return Err(IngestError::EncryptedDocument);
    }
    let mut collector = Collector::default();
    pdf_extract::output_doc(&doc, &mut collector)
        .map_err(|e| IngestError::UnreadableDocument(format!("{e:?}")))?;
    let pages = collector.pages.len();
    let text = layout_text(&collector.pages);
    Ok(ExtractedText {
        no_text: text.is_empty(),
        text,
        pages,
    })
}
