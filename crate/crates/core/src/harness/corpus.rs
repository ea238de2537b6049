//! Deterministic synthetic corpus. Benign files are random compositions of
//! ordinary structural templates; malicious files are minimal bases with a
//! marker payload wired through one of the configured trigger chains. A small
//! benign fraction carries inert JavaScript, so structural classifiers cannot
//! separate the classes on the trigger chain alone.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::oracle::{Oracle, SyntheticOracleConfig};
use crate::pdf::{serialize_document, Dict, ObjId, PdfDocument, PdfName, PdfStream, PdfValue};
use crate::rng::derived_rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub n_train_benign: usize,
    pub n_train_malicious: usize,
    pub n_test_benign: usize,
    pub n_test_malicious: usize,
    pub n_retrain_seeds: usize,
    pub n_test_seeds: usize,
    /// Fraction of benign files carrying inert JavaScript (structural
    /// false-positive pressure).
    pub inert_js_fraction: f64,
    /// Fraction of malicious files using the Names-tree trigger chain
    /// instead of OpenAction.
    pub alt_chain_fraction: f64,
    pub marker: String,
    pub rng_seed: u64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            n_train_benign: 400,
            n_train_malicious: 400,
            n_test_benign: 200,
            n_test_malicious: 200,
            n_retrain_seeds: 40,
            n_test_seeds: 100,
            inert_js_fraction: 0.04,
            alt_chain_fraction: 0.14,
            marker: "SYNTHPAYLOAD77F3".to_string(),
            rng_seed: 0x5eed_c0de,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub id: String,
    pub doc: PdfDocument,
    pub malicious: bool,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub retrain_seed_ids: Vec<String>,
    pub test_seed_ids: Vec<String>,
    pub oracle_config: SyntheticOracleConfig,
}

impl Corpus {
    pub fn sample(&self, id: &str) -> Option<&Sample> {
        self.train
            .iter()
            .chain(self.test.iter())
            .find(|s| s.id == id)
    }

    pub fn retrain_seeds(&self) -> Vec<&Sample> {
        self.retrain_seed_ids
            .iter()
            .map(|id| self.sample(id).expect("seed id in corpus"))
            .collect()
    }

    pub fn test_seeds(&self) -> Vec<&Sample> {
        self.test_seed_ids
            .iter()
            .map(|id| self.sample(id).expect("seed id in corpus"))
            .collect()
    }

    pub fn benign_train_docs(&self) -> Vec<PdfDocument> {
        self.train
            .iter()
            .filter(|s| !s.malicious)
            .map(|s| s.doc.clone())
            .collect()
    }
}

// words that never collide with a counted keyword
const WORDS: [&str; 20] = [
    "alpha", "bravo", "delta", "echo", "foxtrot", "golf", "hotel", "india", "kilo", "lima",
    "metro", "nova", "oscar", "papa", "quebec", "romeo", "sierra", "tango", "victor", "zulu",
];

fn words(rng: &mut ChaCha8Rng, n: usize) -> String {
    (0..n)
        .map(|_| WORDS[rng.gen_range(0..WORDS.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

struct Builder {
    doc: PdfDocument,
    next: u32,
}

impl Builder {
    fn new() -> Self {
        Builder {
            doc: PdfDocument::new("1.7"),
            next: 1,
        }
    }

    fn alloc(&mut self) -> u32 {
        let n = self.next;
        self.next += 1;
        n
    }

    fn put(&mut self, num: u32, value: PdfValue) {
        self.doc.objects.insert(ObjId::new(num, 0), value);
    }

    fn add(&mut self, value: PdfValue) -> u32 {
        let n = self.alloc();
        self.put(n, value);
        n
    }

    fn finish(mut self, root: u32) -> PdfDocument {
        self.doc
            .trailer
            .insert(PdfName::new("/Root"), PdfValue::reference(root));
        self.doc
    }
}

fn dict(entries: Vec<(&str, PdfValue)>) -> Dict {
    entries
        .into_iter()
        .map(|(k, v)| (PdfName::new(k), v))
        .collect()
}

fn stream(entries: Vec<(&str, PdfValue)>, data: impl Into<Vec<u8>>) -> PdfValue {
    PdfValue::Stream(PdfStream {
        dict: dict(entries),
        data: data.into(),
    })
}

fn media_box(dims: [i32; 4]) -> PdfValue {
    PdfValue::Array(dims.iter().map(|d| PdfValue::Numeric(*d as f64)).collect())
}

fn page_tree(
    b: &mut Builder,
    rng: &mut ChaCha8Rng,
    n_pages: usize,
    box_dims: [i32; 4],
    with_fonts: bool,
    with_image: bool,
    with_trans: bool,
) -> u32 {
    let pages_num = b.alloc();
    let font = with_fonts.then(|| {
        b.add(PdfValue::Dictionary(dict(vec![
            ("/Type", PdfValue::name("/Font")),
            ("/Subtype", PdfValue::name("/Type1")),
            ("/BaseFont", PdfValue::name("/Helvetica")),
        ])))
    });
    let image = with_image.then(|| {
        b.add(stream(
            vec![
                ("/Type", PdfValue::name("/XObject")),
                ("/Subtype", PdfValue::name("/Image")),
                ("/Width", PdfValue::Numeric(8.0)),
                ("/Height", PdfValue::Numeric(8.0)),
            ],
            vec![0u8; 16],
        ))
    });
    let mut kids = Vec::new();
    for _ in 0..n_pages {
        let n_words = rng.gen_range(6..18);
        let contents = b.add(stream(vec![], words(rng, n_words)));
        let mut resources = Dict::new();
        if let Some(f) = font {
            resources.insert(
                PdfName::new("/Font"),
                PdfValue::Dictionary(dict(vec![("/F1", PdfValue::reference(f))])),
            );
        }
        if let Some(im) = image {
            resources.insert(
                PdfName::new("/XObject"),
                PdfValue::Dictionary(dict(vec![("/Im1", PdfValue::reference(im))])),
            );
        }
        let mut page = dict(vec![
            ("/Type", PdfValue::name("/Page")),
            ("/Parent", PdfValue::reference(pages_num)),
            ("/MediaBox", media_box(box_dims)),
            ("/Contents", PdfValue::reference(contents)),
        ]);
        if !resources.is_empty() {
            page.insert(PdfName::new("/Resources"), PdfValue::Dictionary(resources));
        }
        if with_trans {
            page.insert(
                PdfName::new("/Trans"),
                PdfValue::Dictionary(dict(vec![("/S", PdfValue::name("/Fade"))])),
            );
        }
        kids.push(PdfValue::reference(b.add(PdfValue::Dictionary(page))));
    }
    b.put(
        pages_num,
        PdfValue::Dictionary(dict(vec![
            ("/Type", PdfValue::name("/Pages")),
            ("/Kids", PdfValue::Array(kids)),
            ("/Count", PdfValue::Numeric(n_pages as f64)),
        ])),
    );
    pages_num
}

/// Optional catalog decorations shared by both classes. `scale` shrinks the
/// per-entry probabilities for malicious documents, which stay lighter than
/// benign ones on average but span the same structural region.
fn add_catalog_extras(b: &mut Builder, rng: &mut ChaCha8Rng, catalog: &mut Dict, scale: f64) {
    if rng.gen::<f64>() < 0.5 * scale {
        let outlines_num = b.alloc();
        let item = b.add(PdfValue::Dictionary(dict(vec![
            ("/Title", PdfValue::String(words(rng, 2).into_bytes())),
            ("/Parent", PdfValue::reference(outlines_num)),
            (
                "/A",
                PdfValue::Dictionary(dict(vec![
                    ("/S", PdfValue::name("/URI")),
                    (
                        "/URI",
                        PdfValue::String(format!("https://example.org/{}", words(rng, 1)).into_bytes()),
                    ),
                ])),
            ),
        ])));
        b.put(
            outlines_num,
            PdfValue::Dictionary(dict(vec![
                ("/Type", PdfValue::name("/Outlines")),
                ("/First", PdfValue::reference(item)),
                ("/Last", PdfValue::reference(item)),
                ("/Count", PdfValue::Numeric(1.0)),
            ])),
        );
        catalog.insert(PdfName::new("/Outlines"), PdfValue::reference(outlines_num));
    }
    if rng.gen::<f64>() < 0.35 * scale {
        catalog.insert(
            PdfName::new("/AcroForm"),
            PdfValue::Dictionary(dict(vec![
                ("/Fields", PdfValue::Array(vec![])),
                ("/DA", PdfValue::String(b"/Helv 0 Tf 0 g".to_vec())),
            ])),
        );
    }
    if rng.gen::<f64>() < 0.4 * scale {
        catalog.insert(
            PdfName::new("/ViewerPreferences"),
            PdfValue::Dictionary(dict(vec![("/FitWindow", PdfValue::Boolean(true))])),
        );
    }
    if rng.gen::<f64>() < 0.35 * scale {
        catalog.insert(
            PdfName::new("/Lang"),
            PdfValue::String(b"en-US".to_vec()),
        );
    }
    if rng.gen::<f64>() < 0.4 * scale {
        catalog.insert(PdfName::new("/PageLayout"), PdfValue::name("/OneColumn"));
    }
    if rng.gen::<f64>() < 0.35 * scale {
        catalog.insert(PdfName::new("/PageMode"), PdfValue::name("/UseNone"));
    }
    if rng.gen::<f64>() < 0.3 * scale {
        catalog.insert(
            PdfName::new("/MarkInfo"),
            PdfValue::Dictionary(dict(vec![("/Marked", PdfValue::Boolean(true))])),
        );
    }
    if rng.gen::<f64>() < 0.25 * scale {
        catalog.insert(
            PdfName::new("/PieceInfo"),
            PdfValue::Dictionary(dict(vec![(
                "/App",
                PdfValue::Dictionary(dict(vec![(
                    "/LastModified",
                    PdfValue::String(b"D:20240101".to_vec()),
                )])),
            )])),
        );
    }
}

/// One benign document. `inert_js` attaches a markerless JavaScript
/// OpenAction, the structural shape that drives false positives.
pub fn generate_benign(rng: &mut ChaCha8Rng, inert_js: bool) -> PdfDocument {
    let mut b = Builder::new();
    let catalog_num = b.alloc();
    let n_pages = rng.gen_range(1..=3);
    let with_fonts = rng.gen::<f64>() < 0.7;
    let with_image = rng.gen::<f64>() < 0.3;
    let pages = page_tree(&mut b, rng, n_pages, [0, 0, 612, 792], with_fonts, with_image, false);
    let mut catalog = dict(vec![
        ("/Type", PdfValue::name("/Catalog")),
        ("/Pages", PdfValue::reference(pages)),
    ]);
    add_catalog_extras(&mut b, rng, &mut catalog, 1.0);
    if rng.gen::<f64>() < 0.45 {
        catalog.insert(
            PdfName::new("/Names"),
            PdfValue::Dictionary(dict(vec![(
                "/Dests",
                PdfValue::Dictionary(dict(vec![("/Names", PdfValue::Array(vec![]))])),
            )])),
        );
    }
    if rng.gen::<f64>() < 0.85 {
        let meta = b.add(stream(
            vec![
                ("/Type", PdfValue::name("/Metadata")),
                ("/Subtype", PdfValue::name("/XML")),
            ],
            {
                let n = rng.gen_range(4..12);
                format!("<meta>{}</meta>", words(rng, n))
            },
        ));
        catalog.insert(PdfName::new("/Metadata"), PdfValue::reference(meta));
    }
    if inert_js {
        let js = b.add(stream(vec![], "alert('hello from a benign script');"));
        catalog.insert(
            PdfName::new("/OpenAction"),
            PdfValue::Dictionary(dict(vec![
                ("/S", PdfValue::name("/JavaScript")),
                ("/JS", PdfValue::reference(js)),
            ])),
        );
    } else if rng.gen::<f64>() < 0.25 {
        catalog.insert(
            PdfName::new("/OpenAction"),
            PdfValue::Dictionary(dict(vec![
                ("/S", PdfValue::name("/GoTo")),
                ("/D", PdfValue::String(b"page1".to_vec())),
            ])),
        );
    }

    b.put(catalog_num, PdfValue::Dictionary(catalog));
    b.finish(catalog_num)
}

const MALICIOUS_BOXES: [[i32; 4]; 3] = [[0, 0, 595, 842], [0, 0, 540, 720], [0, 0, 610, 790]];

/// One malicious document: a minimal base plus the marker payload wired
/// through the OpenAction chain (`alt_chain = false`) or the Names tree.
/// The catalog-level soup stream repeats tokens whose byte counts must
/// survive single trigger-chain deletions.
pub fn generate_malicious(rng: &mut ChaCha8Rng, marker: &str, alt_chain: bool) -> PdfDocument {
    let mut b = Builder::new();
    let catalog_num = b.alloc();
    let box_dims = MALICIOUS_BOXES[rng.gen_range(0..MALICIOUS_BOXES.len())];
    let n_pages = rng.gen_range(1..=3);
    let with_fonts = rng.gen::<f64>() < 0.4;
    let with_image = rng.gen::<f64>() < 0.2;
    let pages = page_tree(&mut b, rng, n_pages, box_dims, with_fonts, with_image, true);

    let mut soup = String::new();
    for token in ["/OpenAction", "/Names", "/Kids"] {
        for _ in 0..rng.gen_range(1..=3usize) {
            soup.push_str(token);
            soup.push(' ');
        }
    }
    let n_words = rng.gen_range(3..9);
    soup.push_str(&words(rng, n_words));
    let meta = b.add(stream(
        vec![
            ("/Type", PdfValue::name("/Metadata")),
            ("/Subtype", PdfValue::name("/XML")),
        ],
        soup,
    ));

    // the /DL entry keeps a deterministic structural separator between
    // marker payload streams and inert benign JavaScript
    let payload = b.add(stream(
        vec![("/DL", PdfValue::Numeric(64.0))],
        format!("alert('{marker}');"),
    ));
    let mut catalog = dict(vec![
        ("/Type", PdfValue::name("/Catalog")),
        ("/Pages", PdfValue::reference(pages)),
        ("/Metadata", PdfValue::reference(meta)),
    ]);
    add_catalog_extras(&mut b, rng, &mut catalog, 0.6);
    if alt_chain {
        catalog.insert(
            PdfName::new("/Names"),
            PdfValue::Dictionary(dict(vec![(
                "/JavaScript",
                PdfValue::Dictionary(dict(vec![(
                    "/Names",
                    PdfValue::Dictionary(dict(vec![("/JS", PdfValue::reference(payload))])),
                )])),
            )])),
        );
    } else {
        catalog.insert(
            PdfName::new("/OpenAction"),
            PdfValue::Dictionary(dict(vec![
                ("/S", PdfValue::name("/JavaScript")),
                ("/JS", PdfValue::reference(payload)),
            ])),
        );
    }
    b.put(catalog_num, PdfValue::Dictionary(catalog));
    b.finish(catalog_num)
}

fn count_of(total: usize, fraction: f64) -> usize {
    (total as f64 * fraction).round() as usize
}

pub fn generate_corpus(cfg: &CorpusConfig) -> Corpus {
    let oracle_config = SyntheticOracleConfig::default_config(cfg.marker.as_bytes());
    let oracle = Oracle::synthetic(oracle_config.clone());

    let make_split = |tag: &str, n_benign: usize, n_malicious: usize, base: u64| {
        let inert = count_of(n_benign, cfg.inert_js_fraction);
        let alt = count_of(n_malicious, cfg.alt_chain_fraction);
        // round-trip through the writer and parser so stored documents are
        // exactly what re-parsing their bytes yields (the writer adds
        // /Length entries the builder leaves implicit)
        let normalize = |doc: PdfDocument| -> PdfDocument {
            let bytes = serialize_document(&doc);
            let (parsed, diags) = crate::pdf::parse_document(&bytes).expect("generated doc parses");
            assert!(diags.is_empty(), "generated doc has diagnostics: {diags:?}");
            parsed
        };
        let mut samples = Vec::new();
        for i in 0..n_benign {
            let mut rng = derived_rng(cfg.rng_seed, base + i as u64);
            let doc = normalize(generate_benign(&mut rng, i < inert));
            samples.push(Sample {
                id: format!("{tag}-b-{i:03}"),
                doc,
                malicious: false,
            });
        }
        for i in 0..n_malicious {
            let mut rng = derived_rng(cfg.rng_seed, base + 0x10_0000 + i as u64);
            let doc = normalize(generate_malicious(&mut rng, &cfg.marker, i < alt));
            samples.push(Sample {
                id: format!("{tag}-m-{i:03}"),
                doc,
                malicious: true,
            });
        }
        for s in &samples {
            let verdict = oracle.assess(&serialize_document(&s.doc));
            assert_eq!(
                verdict.is_malicious(),
                s.malicious,
                "generated sample {} has label/oracle mismatch: {verdict:?}",
                s.id
            );
        }
        samples
    };

    let train = make_split("train", cfg.n_train_benign, cfg.n_train_malicious, 0);
    let test = make_split("test", cfg.n_test_benign, cfg.n_test_malicious, 0x100_0000);

    // interleave the two chains in the seed designations so small seed sets
    // still see both trigger families
    let pick_seeds = |samples: &[Sample], n: usize| -> Vec<String> {
        let malicious: Vec<&Sample> = samples.iter().filter(|s| s.malicious).collect();
        assert!(n <= malicious.len(), "seed count exceeds malicious count");
        let alt = count_of(malicious.len(), cfg.alt_chain_fraction);
        let mut ids = Vec::new();
        let (alts, mains) = malicious.split_at(alt);
        let mut ai = alts.iter();
        let mut mi = mains.iter();
        while ids.len() < n {
            for _ in 0..6 {
                if ids.len() < n {
                    if let Some(s) = mi.next() {
                        ids.push(s.id.clone());
                    }
                }
            }
            if ids.len() < n {
                if let Some(s) = ai.next() {
                    ids.push(s.id.clone());
                } else if mi.len() == 0 {
                    break;
                }
            }
        }
        ids
    };
    let retrain_seed_ids = pick_seeds(&train, cfg.n_retrain_seeds);
    let test_seed_ids = pick_seeds(&test, cfg.n_test_seeds);

    Corpus {
        train,
        test,
        retrain_seed_ids,
        test_seed_ids,
        oracle_config,
    }
}
