"""Ecore metamodel import: EPackage trees become schema declarations.

Classes map to node classes, attributes to attributes, references to edge
classes, enumerations to enums.  Names are mangled to stay unique: class
names get their package path as a prefix (underscore-separated), reference
names additionally get their owning class name.  Inheritance and the
containment flag carry over one-to-one.
"""

from __future__ import annotations

import warnings
import xml.etree.ElementTree as ET

from ..errors import ImportError_
from ..metamodel import (
    AttributeDecl,
    PackageInfo,
    SchemaBuilder,
    enum_type,
    scalar,
)

ECORE_NS = "http://www.eclipse.org/emf/2002/Ecore"
XSI_TYPE = "{http://www.w3.org/2001/XMLSchema-instance}type"

DATATYPE_MAP = {
    "EString": "string",
    "EInt": "integer",
    "ELong": "integer",
    "EShort": "integer",
    "EBoolean": "boolean",
    "EDouble": "double",
    "EFloat": "double",
}


class _Classifier:
    def __init__(self, kind, name, pkg_path, elem):
        self.kind = kind  # class | enum
        self.name = name
        self.pkg_path = pkg_path  # tuple of package names
        self.elem = elem

    @property
    def mangled(self):
        return "_".join(self.pkg_path + (self.name,))


def import_ecore(source, builder=None):
    """Import one Ecore document (path, file object, or Element) into a builder."""
    builder = builder or SchemaBuilder()
    root = _rootify(source)
    if _local(root.tag) != "EPackage":
        raise ImportError_(f"expected an EPackage root, got {_local(root.tag)}")
    classifiers = {}
    _collect_package(root, (), classifiers, builder)
    _declare_enums(classifiers, builder)
    _declare_classes(classifiers, builder)
    _declare_references(classifiers, builder)
    return builder


def load_schema(paths):
    """Build a schema from a mix of .ecore and schema-text (.gm) files."""
    from ..metamodel import parse_schema_text

    builder = SchemaBuilder()
    for path in paths:
        text = open(path, encoding="utf-8").read()
        if text.lstrip().startswith("<"):
            import_ecore(path, builder)
        else:
            parse_schema_text(text, builder, filename=str(path))
    return builder.build()


def _rootify(source):
    if isinstance(source, ET.Element):
        return source
    return ET.parse(source).getroot()


def _local(tag):
    return tag.rsplit("}", 1)[-1]


def _collect_package(pkg_elem, parents, classifiers, builder):
    name = pkg_elem.get("name")
    if not name:
        raise ImportError_("EPackage without a name")
    path = parents + (name,)
    builder.add_package(
        PackageInfo(
            "_".join(path),
            pkg_elem.get("nsURI", ""),
            pkg_elem.get("nsPrefix", ""),
        )
    )
    for child in pkg_elem:
        local = _local(child.tag)
        if local == "eClassifiers":
            kind = _xsi_kind(child)
            if kind == "EClass":
                c = _Classifier("class", child.get("name"), path, child)
            elif kind == "EEnum":
                c = _Classifier("enum", child.get("name"), path, child)
            elif kind == "EDataType":
                # user datatypes fall back to string at the attribute level
                c = _Classifier("datatype", child.get("name"), path, child)
            else:
                raise ImportError_(f"unsupported Ecore classifier kind {kind!r}")
            if not c.name:
                raise ImportError_("classifier without a name")
            classifiers["/".join(path[1:] + (c.name,))] = c
            classifiers.setdefault(c.name, c)  # same-package shorthand
        elif local == "eSubpackages":
            _collect_package(child, path, classifiers, builder)
        elif local == "eAnnotations":
            warnings.warn(f"ignoring eAnnotations on package {name}")
        else:
            raise ImportError_(f"unsupported Ecore construct <{local}> in package {name}")


def _xsi_kind(elem):
    t = elem.get(XSI_TYPE, "")
    return t.split(":")[-1] if t else ""


def _declare_enums(classifiers, builder):
    for c in _unique(classifiers):
        if c.kind != "enum":
            continue
        items = []
        next_value = 0
        for lit in c.elem:
            if _local(lit.tag) != "eLiterals":
                raise ImportError_(f"unsupported construct in enum {c.name}")
            value = lit.get("value")
            next_value = int(value) if value is not None else next_value
            items.append((lit.get("name"), next_value))
            next_value += 1
        builder.declare_enum(c.mangled, items)


def _declare_classes(classifiers, builder):
    classes = [c for c in _unique(classifiers) if c.kind == "class"]
    # supertypes must exist before their subclasses
    done = set()
    remaining = list(classes)
    while remaining:
        progressed = False
        for c in list(remaining):
            supers = _super_refs(c, classifiers)
            if any(s not in done and s in {x.mangled for x in classes} for s in supers):
                continue
            attrs = _attribute_decls(c, classifiers)
            builder.declare_node_class(
                c.mangled,
                supers=supers,
                attrs=attrs,
                is_abstract=c.elem.get("abstract") == "true",
            )
            done.add(c.mangled)
            remaining.remove(c)
            progressed = True
        if not progressed:
            names = ", ".join(c.mangled for c in remaining)
            raise ImportError_(f"unresolved or cyclic supertypes among: {names}")


def _unique(classifiers):
    seen = []
    for c in classifiers.values():
        if c not in seen:
            seen.append(c)
    return seen


def _super_refs(c, classifiers):
    supers = []
    spec = c.elem.get("eSuperTypes")
    if spec:
        for ref in spec.split():
            supers.append(_resolve_class_ref(ref, c, classifiers).mangled)
    for child in c.elem:
        if _local(child.tag) == "eSuperTypes":
            href = child.get("href", "")
            supers.append(_resolve_class_ref(href, c, classifiers).mangled)
    return supers


def _resolve_class_ref(ref, ctx, classifiers):
    key = ref.split("#//")[-1].lstrip("/")
    found = classifiers.get(key)
    if found is None or found.kind == "datatype":
        raise ImportError_(
            f"unresolved type reference {ref!r} (from {ctx.name})"
        )
    return found


def _attribute_decls(c, classifiers):
    attrs = []
    for feat in c.elem:
        local = _local(feat.tag)
        if local == "eSuperTypes":
            continue
        if local != "eStructuralFeatures":
            raise ImportError_(f"unsupported construct <{local}> in class {c.name}")
        kind = _xsi_kind(feat)
        if kind == "EAttribute":
            attrs.append(AttributeDecl(feat.get("name"), _value_type(feat, c, classifiers)))
        elif kind == "EReference":
            continue  # handled as edge classes
        else:
            raise ImportError_(f"unsupported feature kind {kind!r} in class {c.name}")
    return attrs


def _value_type(feat, c, classifiers):
    etype = feat.get("eType", "")
    if not etype:
        for child in feat:
            if _local(child.tag) == "eType":
                etype = child.get("href", "")
                break
    if not etype:
        raise ImportError_(f"attribute {feat.get('name')} of {c.name} has no eType")
    if "#//" in etype and ECORE_NS in etype:
        datatype = etype.split("#//")[-1]
        mapped = DATATYPE_MAP.get(datatype)
        if mapped is None:
            warnings.warn(f"datatype {datatype} mapped to string")
            return scalar("string")
        return scalar(mapped)
    target = _resolve_class_ref(etype, c, classifiers)
    if target.kind == "enum":
        return enum_type(target.mangled)
    if target.kind == "datatype":
        warnings.warn(f"user datatype {target.name} mapped to string")
        return scalar("string")
    raise ImportError_(
        f"attribute {feat.get('name')} of {c.name} has a class eType; use an EReference"
    )


def _declare_references(classifiers, builder):
    for c in _unique(classifiers):
        if c.kind != "class":
            continue
        for feat in c.elem:
            if _local(feat.tag) != "eStructuralFeatures" or _xsi_kind(feat) != "EReference":
                continue
            name = feat.get("name")
            etype = feat.get("eType", "")
            if not etype:
                for child in feat:
                    if _local(child.tag) == "eType":
                        etype = child.get("href", "")
            if _is_eobject(etype):
                target = "Node"
            else:
                target_cls = _resolve_class_ref(etype, c, classifiers)
                if target_cls.kind != "class":
                    raise ImportError_(f"reference {name} of {c.name} targets a non-class")
                target = target_cls.mangled
            builder.declare_edge_class(
                f"{c.mangled}_{name}",
                containment=feat.get("containment") == "true",
                source=c.mangled,
                target=target,
            )


def _is_eobject(etype):
    return ECORE_NS in etype and etype.split("#//")[-1] == "EObject"
