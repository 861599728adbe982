"""Reading and writing resources as a directory of canonical JSON files.

Layout of a resource directory::

    manifest.json        format version and sha256 of every other file
    vocabulary.json      roles, role variants, feature attributes
    ontology.json        one record per type
    lexicon.json         one record per (word, pos)
    templates.json       linking templates
    axioms.json          axioms in bracketed term notation
    mappings.json        synset -> type mappings
    skeleton_rules.json  gap-path rules for role identification
    phrase_rules.json    hand-mapped classification rules

The gloss corpus is a separate ``corpus.json`` file.  Files are written with
sorted keys, two-space indentation and a trailing newline, so structurally
equal resources serialize to identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

from .corpus import Corpus, Synset, Token
from .logic import TermSyntaxError, parse_axiom, render
from .model import (
    FeatureVocabulary, LexEntry, LexSense, LinkingTemplate, Mapping, OntType, PathStep,
    PhraseRule, Provenance, Resource, ResourceError, RoleSpec, SkeletonRule, Slot, type_id,
)

FORMAT_VERSION = 1
RESOURCE_FILES = (
    "vocabulary.json", "ontology.json", "lexicon.json", "templates.json", "axioms.json",
    "mappings.json", "skeleton_rules.json", "phrase_rules.json",
)


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ResourceError("missing file", source=path.name) from None
    except json.JSONDecodeError as exc:
        raise ResourceError(f"invalid JSON: {exc}", source=path.name) from None


def _need(record: dict, key: str, source: str, ident: str = "") -> Any:
    if key not in record:
        raise ResourceError(f"missing field {key!r}", source=source, key=ident)
    return record[key]


# ---------------------------------------------------------------------------
# records -> objects


def _role_spec(rec: dict, vocab: FeatureVocabulary, source: str, key: str) -> RoleSpec:
    try:
        features = vocab.parse(rec.get("features", []))
    except ResourceError as exc:
        raise ResourceError(str(exc), source=source, key=key) from None
    restriction = rec.get("type")
    return RoleSpec(
        role=_need(rec, "role", source, key),
        features=features,
        restriction=type_id(restriction) if restriction else None,
        optional=bool(rec.get("optional", False)),
    )


def _load_vocabulary(data: dict) -> dict:
    features = {a: tuple(v) for a, v in _need(data, "features", "vocabulary.json").items()}
    vocab = FeatureVocabulary(features, frozenset(data.get("bare", [])))
    for attr in vocab.bare:
        if attr not in features:
            raise ResourceError(f"bare attribute {attr} not declared", source="vocabulary.json")
    return {
        "vocabulary": vocab,
        "roles": tuple(_need(data, "roles", "vocabulary.json")),
        "core_roles": tuple(data.get("core_roles", [])),
        "role_variants": dict(data.get("role_variants", {})),
        "event_root": type_id(data["event_root"]) if data.get("event_root") else None,
        "impro_type": type_id(data.get("impro_type", "ONT::REFERENTIAL-SEM")),
    }


def resource_from_records(records: dict[str, Any]) -> Resource:
    """Build and validate a resource from already-parsed JSON documents."""
    voc = _load_vocabulary(records["vocabulary.json"])
    vocab = voc["vocabulary"]
    roles = set(voc["roles"])

    ontology: dict[str, OntType] = {}
    for rec in records["ontology.json"]:
        name = type_id(_need(rec, "name", "ontology.json"))
        if name in ontology:
            raise ResourceError("duplicate type", source="ontology.json", key=name)
        specs = tuple(_role_spec(a, vocab, "ontology.json", name) for a in rec.get("arguments", []))
        for spec in specs:
            if spec.role not in roles:
                raise ResourceError(f"unknown role {spec.role}", source="ontology.json", key=name)
        try:
            features = vocab.parse(rec.get("features", []))
        except ResourceError as exc:
            raise ResourceError(str(exc), source="ontology.json", key=name) from None
        parent = rec.get("parent")
        ontology[name] = OntType(
            id=name,
            parent=type_id(parent) if parent else None,
            roles=specs,
            axioms=tuple(rec.get("axioms", [])),
            synsets=tuple(rec.get("wn", [])),
            provenance=Provenance.parse(rec.get("provenance", "seed")),
            features=features,
            stative=bool(rec.get("stative", False)),
        )

    templates: dict[str, LinkingTemplate] = {}
    for rec in records["templates.json"]:
        name = _need(rec, "name", "templates.json")
        slots = []
        for s in _need(rec, "slots", "templates.json", name):
            slots.append(Slot(
                grel=_need(s, "grel", "templates.json", name),
                phrase=_need(s, "phrase", "templates.json", name),
                role=_need(s, "role", "templates.json", name),
                ctype=s.get("ctype"), ptype=s.get("ptype"),
                var=s.get("var"), subj=s.get("subj"),
                optional=bool(s.get("optional", False)),
            ))
        templates[name] = LinkingTemplate(name, tuple(slots))

    lexicon: dict[tuple[str, str], LexEntry] = {}
    for rec in records["lexicon.json"]:
        word = _need(rec, "word", "lexicon.json")
        pos = _need(rec, "pos", "lexicon.json", word)
        senses = tuple(LexSense(type_id(_need(s, "type", "lexicon.json", word)),
                                tuple(s.get("templates", [])))
                       for s in _need(rec, "senses", "lexicon.json", word))
        if (word, pos) in lexicon:
            raise ResourceError(f"duplicate entry ({word}, {pos})", source="lexicon.json", key=word)
        lexicon[(word, pos)] = LexEntry(word, pos, senses)

    axioms = {}
    for rec in records["axioms.json"]:
        aid = _need(rec, "id", "axioms.json")
        try:
            ax = parse_axiom(aid, _need(rec, "axiom", "axioms.json", aid),
                             tuple(rec["roles"]) if "roles" in rec else None,
                             tuple(rec.get("existentials", [])))
        except TermSyntaxError as exc:
            raise ResourceError(str(exc), source="axioms.json", key=aid) from None
        axioms[aid] = ax

    mappings = []
    seen = set()
    for rec in records["mappings.json"]:
        m = Mapping(_need(rec, "synset", "mappings.json"),
                    type_id(_need(rec, "type", "mappings.json", rec.get("synset", ""))),
                    rec.get("kind", "direct"), rec.get("provenance", "seed"))
        if (m.synset, m.type) in seen:
            raise ResourceError(f"duplicate mapping to {m.type}", source="mappings.json",
                                key=m.synset)
        seen.add((m.synset, m.type))
        mappings.append(m)

    skeleton = tuple(
        SkeletonRule(rec["id"], tuple(PathStep(st["label"], st.get("cat")) for st in rec["pattern"]),
                     rec["emits"], int(rec["priority"]))
        for rec in records["skeleton_rules.json"])
    phrase = tuple(
        PhraseRule(type_id(rec["head"]), tuple(type_id(m) for m in rec.get("modifiers", [])),
                   type_id(rec["target"]))
        for rec in records["phrase_rules.json"])

    resource = Resource(
        ontology=ontology, lexicon=lexicon, templates=templates, axioms=axioms,
        mappings=tuple(sorted(mappings, key=lambda m: (m.synset, m.type))),
        skeleton_rules=tuple(sorted(skeleton, key=lambda r: -r.priority)),
        phrase_rules=phrase, **voc)
    resource.validate()
    return resource


def load_resource(directory: str | Path, *, verify_manifest: bool = True) -> Resource:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    raw: dict[str, bytes] = {}
    for name in RESOURCE_FILES:
        path = directory / name
        try:
            raw[name] = path.read_bytes()
        except FileNotFoundError:
            raise ResourceError("missing file", source=name) from None
    if verify_manifest and manifest_path.exists():
        manifest = _read_json(manifest_path)
        if manifest.get("format_version") != FORMAT_VERSION:
            raise ResourceError(f"unsupported format version {manifest.get('format_version')}",
                                source="manifest.json")
        for name, digest in sorted(manifest.get("files", {}).items()):
            if name in raw and _sha256(raw[name]) != digest:
                raise ResourceError("content hash does not match manifest", source=name)
    records = {}
    for name, data in raw.items():
        try:
            records[name] = json.loads(data.decode("utf-8"))
        except json.JSONDecodeError as exc:
            raise ResourceError(f"invalid JSON: {exc}", source=name) from None
    return resource_from_records(records)


# ---------------------------------------------------------------------------
# objects -> records


def _role_record(spec: RoleSpec, vocab: FeatureVocabulary) -> dict:
    rec: dict[str, Any] = {"role": spec.role, "features": vocab.format(spec.features)}
    if spec.restriction:
        rec["type"] = spec.restriction
    if spec.optional:
        rec["optional"] = True
    return rec


def resource_records(r: Resource) -> dict[str, Any]:
    vocab = r.vocabulary
    voc = {
        "features": {a: list(v) for a, v in sorted(vocab.attributes.items())},
        "bare": sorted(vocab.bare),
        "roles": list(r.roles),
        "core_roles": list(r.core_roles),
        "role_variants": dict(sorted(r.role_variants.items())),
        "impro_type": r.impro_type,
    }
    if r.event_root:
        voc["event_root"] = r.event_root
    ontology = []
    for tid in sorted(r.ontology):
        t = r.ontology[tid]
        ontology.append({
            "name": t.id, "parent": t.parent,
            "arguments": [_role_record(s, vocab) for s in t.roles],
            "axioms": list(t.axioms), "wn": list(t.synsets),
            "provenance": str(t.provenance),
            "features": vocab.format(t.features),
            "stative": t.stative,
        })
    lexicon = [{"word": e.word, "pos": e.pos,
                "senses": [{"type": s.type, "templates": list(s.templates)} for s in e.senses]}
               for _k, e in sorted(r.lexicon.items())]
    templates = []
    for name in sorted(r.templates):
        slots = []
        for s in r.templates[name].slots:
            rec = {"grel": s.grel, "phrase": s.phrase, "role": s.role}
            for key in ("ctype", "ptype", "var", "subj"):
                if getattr(s, key):
                    rec[key] = getattr(s, key)
            if s.optional:
                rec["optional"] = True
            slots.append(rec)
        templates.append({"name": name, "slots": slots})
    axioms = [{"id": aid, "axiom": r.axioms[aid].render(), "roles": list(r.axioms[aid].roles),
               "existentials": list(r.axioms[aid].existentials)}
              for aid in sorted(r.axioms)]
    mappings = [{"synset": m.synset, "type": m.type, "kind": m.kind, "provenance": m.provenance}
                for m in sorted(r.mappings, key=lambda m: (m.synset, m.type))]
    skeleton = [{"id": k.id, "priority": k.priority, "emits": k.emits,
                 "pattern": [{"label": st.label, **({"cat": st.cat} if st.cat else {})}
                             for st in k.pattern]}
                for k in sorted(r.skeleton_rules, key=lambda k: -k.priority)]
    phrase = [{"head": p.head, "modifiers": list(p.modifiers), "target": p.target}
              for p in sorted(r.phrase_rules, key=lambda p: (p.target, p.head, p.modifiers))]
    return {
        "vocabulary.json": voc, "ontology.json": ontology, "lexicon.json": lexicon,
        "templates.json": templates, "axioms.json": axioms, "mappings.json": mappings,
        "skeleton_rules.json": skeleton, "phrase_rules.json": phrase,
    }


def serialize_resource(r: Resource) -> dict[str, bytes]:
    """Canonical bytes for every file of the resource, manifest included."""
    files = {name: dumps(rec).encode("utf-8") for name, rec in resource_records(r).items()}
    manifest = {"format_version": FORMAT_VERSION,
                "files": {name: _sha256(data) for name, data in sorted(files.items())}}
    files["manifest.json"] = dumps(manifest).encode("utf-8")
    return files


def save_resource(r: Resource, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, data in sorted(serialize_resource(r).items()):
        path = directory / name
        path.write_bytes(data)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# corpus


def corpus_from_records(records: list[dict]) -> Corpus:
    synsets = []
    for rec in records:
        sid = _need(rec, "id", "corpus.json")
        tagged = tuple(Token(t[0], t[1] if len(t) > 1 else None)
                       for t in rec.get("tagged_gloss", []))
        gloss = rec.get("gloss") or " ".join(t.text for t in tagged)
        synsets.append(Synset(
            id=sid, senses=tuple(_need(rec, "senses", "corpus.json", sid)), gloss=gloss,
            tagged_gloss=tagged, hypernyms=tuple(rec.get("hypernyms", [])),
            examples=tuple(rec.get("examples", []))))
    return Corpus.of(synsets)


def load_corpus(path: str | Path) -> Corpus:
    return corpus_from_records(_read_json(Path(path)))


def corpus_records(corpus: Corpus) -> list[dict]:
    out = []
    for sid in sorted(corpus.synsets):
        s = corpus.synsets[sid]
        out.append({"id": s.id, "senses": list(s.senses), "gloss": s.gloss,
                    "tagged_gloss": [[t.text, t.sense] for t in s.tagged_gloss],
                    "hypernyms": list(s.hypernyms), "examples": list(s.examples)})
    return out


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(dumps(corpus_records(corpus)), encoding="utf-8")


# ---------------------------------------------------------------------------
# summaries


def summarize(r: Resource) -> dict[str, Any]:
    """Coverage numbers: verb lemmas, event types, mean senses per verb."""
    verbs = [e for e in r.lexicon.values() if e.pos == "v"]
    sense_count = sum(len(e.senses) for e in verbs)
    if r.event_root:
        event_types = len(r.descendants(r.event_root)) - 1
    else:
        event_types = len(r.ontology)
    avg = round(sense_count / len(verbs), 2) if verbs else 0.0
    return {"verbs": len(verbs), "senseTypes": event_types, "avgSensesPerVerb": avg,
            "avgSensesPerVerbText": f"{avg:.2f}"}


def format_type(r: Resource, t: str) -> str:
    """Human-readable type summary in the layout of a concept entry."""
    ot = r.get(t)
    lines = [ot.id, f"Parent: {ot.parent or '-'}", "Arguments:"]
    for spec in r.effective_roles(t):
        pref = " ".join(r.vocabulary.format(spec.features))
        if spec.restriction:
            pref = (pref + " " + spec.restriction).strip()
        lines.append(f"  {spec.role} {{{pref}}}")
    lines.append("Definition:")
    for aid in ot.axioms:
        lines.append("  " + render(r.axioms[aid].consequent))
    if ot.synsets:
        lines.append("Synsets: " + " ".join(ot.synsets))
    lines.append(f"Provenance: {ot.provenance}")
    return "\n".join(lines)
