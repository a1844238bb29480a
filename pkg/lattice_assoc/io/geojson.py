"""GeoJSON lattice input and enriched output."""
import json
import math
from pathlib import Path
from typing import Any, Dict, List

import structlog
from shapely.geometry import mapping, shape

from lattice_assoc.errors import DuplicateId, LatticeAssocError, MissingId, ParseError
from lattice_assoc.inference.models import SignificanceMap
from lattice_assoc.lattice.models import Lattice

logger = structlog.get_logger()

POLYGONAL = ('Polygon', 'MultiPolygon')


def _load(path: Path) -> Dict[str, Any]:
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except OSError as e:
        raise ParseError(f"Cannot read {path}: {e}", {'path': str(path)}) from None
    except json.JSONDecodeError as e:
        raise ParseError(
            f"{path}: invalid JSON at line {e.lineno}: {e.msg}",
            {'path': str(path), 'line': e.lineno}
        ) from None
    if not isinstance(document, dict) or document.get('type') != 'FeatureCollection':
        raise ParseError(f"{path} is not a GeoJSON FeatureCollection", {'path': str(path)})
    features = document.get('features')
    if not isinstance(features, list):
        raise ParseError(f"{path} has no feature list", {'path': str(path)})
    return document


def _feature_id(feature: Dict[str, Any], position: int, path: Path) -> str:
    properties = feature.get('properties') or {}
    site = properties.get('id')
    if site is None or isinstance(site, (dict, list)) or str(site) == '':
        raise MissingId(
            f"{path}: feature {position} has no usable 'id' property",
            {'path': str(path), 'feature': position}
        )
    return str(site)


def _rings_closed(raw: Dict[str, Any]) -> bool:
    """True when every ring's first and last positions are equal."""
    polygons = raw.get('coordinates')
    if raw.get('type') == 'Polygon':
        polygons = [polygons]
    if not isinstance(polygons, list):
        return False
    for rings in polygons:
        if not isinstance(rings, list):
            return False
        for ring in rings:
            if not isinstance(ring, list) or not ring or list(ring[0]) != list(ring[-1]):
                return False
    return True


def read_geojson(path) -> Lattice:
    """
    Read a FeatureCollection of Polygon/MultiPolygon features into a Lattice.

    Site order is file order; ids come from the `id` property.

    Raises:
        ParseError: unreadable file, not a FeatureCollection, bad geometry
        MissingId: feature without an `id` property
        DuplicateId: two features share an id
    """
    path = Path(path)
    document = _load(path)

    ids: List[str] = []
    geometries = []
    seen = set()
    for position, feature in enumerate(document['features']):
        if not isinstance(feature, dict) or feature.get('type') != 'Feature':
            raise ParseError(f"{path}: entry {position} is not a Feature", {'path': str(path), 'feature': position})
        site = _feature_id(feature, position, path)
        if site in seen:
            raise DuplicateId(f"{path}: duplicate id '{site}'", {'path': str(path), 'id': site})
        seen.add(site)

        raw = feature.get('geometry')
        if raw is None:
            geometry = None
        else:
            if raw.get('type') not in POLYGONAL:
                raise ParseError(
                    f"{path}: feature '{site}' has geometry type {raw.get('type')}",
                    {'path': str(path), 'id': site}
                )
            if not _rings_closed(raw):
                raise ParseError(f"{path}: feature '{site}' has an unclosed ring", {'path': str(path), 'id': site})
            try:
                geometry = shape(raw)
            except Exception as e:
                raise ParseError(f"{path}: invalid geometry for '{site}': {e}", {'path': str(path), 'id': site}) from None

        ids.append(site)
        geometries.append(geometry)

    try:
        lattice = Lattice(ids=tuple(ids), geometries=tuple(geometries))
    except LatticeAssocError as e:
        raise ParseError(f"{path}: {e.message}", {'path': str(path), **e.details}) from None
    logger.info("Lattice read", path=str(path), n=lattice.n)
    return lattice


def _dump(document: Dict[str, Any], path) -> None:
    Path(path).write_text(json.dumps(document, ensure_ascii=False, allow_nan=False) + "\n", encoding='utf-8')


def write_lattice_geojson(lattice: Lattice, path) -> None:
    """FeatureCollection with one feature per site carrying only its id."""
    features = []
    for site in lattice.ids:
        geometry = lattice.geometry(site)
        features.append({
            'type': 'Feature',
            'properties': {'id': site},
            'geometry': mapping(geometry) if geometry is not None else None,
        })
    _dump({'type': 'FeatureCollection', 'features': features}, path)
    logger.info("Lattice written", path=str(path), n=lattice.n)


def enrich_geojson(source, significance: SignificanceMap, destination) -> None:
    """
    Copy `source` to `destination`, adding lisa_value, lisa_p and lisa_class
    to each feature's properties. Everything else is left as read.
    """
    source = Path(source)
    document = _load(source)
    index = {site: a for a, site in enumerate(significance.ids)}

    for position, feature in enumerate(document['features']):
        site = _feature_id(feature, position, source)
        if site not in index:
            continue
        a = index[site]
        p = float(significance.pseudo_p[a])
        properties = feature.get('properties')
        if properties is None:
            properties = feature['properties'] = {}
        properties['lisa_value'] = float(significance.values[a])
        properties['lisa_p'] = None if math.isnan(p) else p
        properties['lisa_class'] = significance.classes[a].value

    _dump(document, destination)
    logger.info("GeoJSON enriched", source=str(source), destination=str(destination))
