"""Typed content values: the atoms every contribution is made of.

Four kinds exist: free text, quantities (exact decimal magnitude plus an
opaque unit code), calendar dates (a single day or a closed day range), and
references to entities, optionally linked to the same entity in a third-party
knowledge graph. Dates accept reduced ISO-8601 precision: ``2021`` and
``2021-03`` normalize to the full range of days they cover.
"""

from __future__ import annotations

import calendar
import re
from dataclasses import dataclass
from datetime import date
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import Any, Union
from urllib.parse import urlparse

from .errors import InvalidValue


class ValueKind(str, Enum):
    TEXT = "text"
    QUANTITY = "quantity"
    DATE = "date"
    ENTITY = "entity"


@dataclass(frozen=True)
class ExternalLink:
    """Pointer to the same entity in a third-party knowledge graph."""

    graph: str
    external_id: str
    url: str

    def __post_init__(self) -> None:
        if not (self.graph and self.external_id and self.url):
            raise InvalidValue("external link requires graph, external_id and url")
        parsed = urlparse(self.url)
        if not parsed.scheme or not parsed.netloc:
            raise InvalidValue(f"external link url is not absolute: {self.url!r}")


@dataclass(frozen=True)
class TextValue:
    text: str

    def display(self) -> str:
        return self.text


@dataclass(frozen=True)
class QuantityValue:
    magnitude: Decimal
    unit: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.magnitude, Decimal):
            raise InvalidValue(f"quantity magnitude must be a Decimal, got {type(self.magnitude).__name__}")
        if not self.magnitude.is_finite():
            raise InvalidValue(f"quantity magnitude must be finite, got {self.magnitude}")
        if self.unit == "":
            object.__setattr__(self, "unit", None)

    def display(self) -> str:
        text = str(self.magnitude)
        return f"{text} {self.unit}" if self.unit else text


@dataclass(frozen=True)
class DateValue:
    """A calendar date, or a closed [start, end] range for study durations."""

    start: date
    end: date

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise InvalidValue(f"date range start {self.start} is after end {self.end}")

    @classmethod
    def point(cls, day: date) -> "DateValue":
        return cls(day, day)

    @property
    def is_point(self) -> bool:
        return self.start == self.end

    def display(self) -> str:
        if self.is_point:
            return self.start.isoformat()
        return f"{self.start.isoformat()}/{self.end.isoformat()}"


@dataclass(frozen=True)
class EntityValue:
    entity_id: str
    link: ExternalLink | None = None

    def __post_init__(self) -> None:
        if not self.entity_id:
            raise InvalidValue("entity reference needs a non-empty local id")

    def display(self) -> str:
        return self.entity_id


Value = Union[TextValue, QuantityValue, DateValue, EntityValue]

_KIND_BY_TYPE: dict[type, ValueKind] = {
    TextValue: ValueKind.TEXT,
    QuantityValue: ValueKind.QUANTITY,
    DateValue: ValueKind.DATE,
    EntityValue: ValueKind.ENTITY,
}


def value_kind(value: Value) -> ValueKind:
    return _KIND_BY_TYPE[type(value)]


_DATE_RE = re.compile(r"^(\d{4})(?:-(\d{2}))?(?:-(\d{2}))?$")


def parse_date_bounds(text: str) -> tuple[date, date]:
    """Expand an ISO-8601 date of full or reduced precision to the day range it covers.

    ``2020-02-14`` covers exactly itself, ``2020-02`` the whole month,
    ``2020`` the whole year.
    """
    match = _DATE_RE.match(text or "")
    if not match:
        raise InvalidValue(f"not an ISO-8601 date: {text!r}")
    year_s, month_s, day_s = match.groups()
    year = int(year_s)
    try:
        if day_s is not None:
            day = date(year, int(month_s), int(day_s))
            return day, day
        if month_s is not None:
            month = int(month_s)
            last = calendar.monthrange(year, month)[1]
            return date(year, month, 1), date(year, month, last)
        return date(year, 1, 1), date(year, 12, 31)
    except ValueError as exc:
        raise InvalidValue(f"not a valid calendar date: {text!r} ({exc})") from exc


def parse_decimal(raw: Any) -> Decimal:
    if isinstance(raw, bool) or not isinstance(raw, (int, float, str, Decimal)):
        raise InvalidValue(f"not a numeric magnitude: {raw!r}")
    try:
        magnitude = raw if isinstance(raw, Decimal) else Decimal(str(raw))
    except InvalidOperation as exc:
        raise InvalidValue(f"not a numeric magnitude: {raw!r}") from exc
    if not magnitude.is_finite():
        raise InvalidValue(f"magnitude must be finite, got {raw!r}")
    return magnitude


def parse_value(obj: Any) -> Value:
    """Build a Value from its tagged JSON object form."""
    if not isinstance(obj, dict):
        raise InvalidValue(f"value must be a tagged object, got {type(obj).__name__}")
    tag = obj.get("type")
    if tag == "text":
        text = obj.get("value")
        if not isinstance(text, str) or not text:
            raise InvalidValue("text value needs a non-empty string under 'value'")
        return TextValue(text)
    if tag == "quantity":
        if "value" not in obj:
            raise InvalidValue("quantity needs a 'value' field")
        unit = obj.get("unit")
        if unit is not None and not isinstance(unit, str):
            raise InvalidValue("quantity unit must be a string")
        return QuantityValue(parse_decimal(obj["value"]), unit)
    if tag == "date":
        start_raw = obj.get("start")
        if not isinstance(start_raw, str):
            raise InvalidValue("date value needs a 'start' field")
        start_lo, start_hi = parse_date_bounds(start_raw)
        end_raw = obj.get("end")
        if end_raw is None:
            return DateValue(start_lo, start_hi)
        if not isinstance(end_raw, str):
            raise InvalidValue("date 'end' must be a string")
        _, end_hi = parse_date_bounds(end_raw)
        return DateValue(start_lo, end_hi)
    if tag == "entity":
        entity_id = obj.get("id")
        if not isinstance(entity_id, str) or not entity_id:
            raise InvalidValue("entity value needs a non-empty 'id'")
        link_obj = obj.get("link")
        link = None
        if link_obj is not None:
            if not isinstance(link_obj, dict):
                raise InvalidValue("entity link must be an object")
            link = ExternalLink(
                graph=link_obj.get("graph", ""),
                external_id=link_obj.get("external_id", ""),
                url=link_obj.get("url", ""),
            )
        return EntityValue(entity_id, link)
    raise InvalidValue(f"unknown value type tag: {tag!r}")


def value_payload(value: Value) -> dict[str, Any]:
    """JSON object for API payloads; carries the display string alongside the raw fields."""
    kind = value_kind(value)
    payload: dict[str, Any] = {"type": kind.value, "display": value.display()}
    if isinstance(value, TextValue):
        payload["value"] = value.text
    elif isinstance(value, QuantityValue):
        payload["magnitude"] = str(value.magnitude)
        payload["unit"] = value.unit
    elif isinstance(value, DateValue):
        payload["start"] = value.start.isoformat()
        payload["end"] = value.end.isoformat()
    else:
        payload["id"] = value.entity_id
        payload["link"] = (
            {
                "graph": value.link.graph,
                "external_id": value.link.external_id,
                "url": value.link.url,
            }
            if value.link
            else None
        )
    return payload
