"""Shape oracles that parse rendered inputs independently of the generators."""
import re
import xml.etree.ElementTree as ET


def tree_shape(text: str) -> str:
    return re.sub(r"\d+", "#", text)


def xml_shape(text: str) -> str:
    def walk(el):
        return "E" + ("@" if el.attrib else "") + "[" + "".join(walk(c) for c in el) + "]"

    return walk(ET.fromstring(text))


def expr_shape(text: str) -> str:
    # Literals, variable indices and operators are values; keep lets, parens
    # and the literal/variable distinction.
    text = re.sub(r"x\d+ =", "B =", text)
    text = re.sub(r"x\d+", "V", text)
    text = re.sub(r"\b\d+\b", "L", text)
    return re.sub(r" [-+*/%] ", " o ", text)


SHAPES = {"tree": tree_shape, "xml": xml_shape, "expr": expr_shape}
