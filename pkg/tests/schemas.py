"""JSON schemas for the machine-readable CLI outputs."""

BOX = {
    "type": "array",
    "items": {"type": "integer", "minimum": 0},
    "minItems": 4,
    "maxItems": 4,
}

RESULTS = {
    "type": "object",
    "required": ["method", "results"],
    "additionalProperties": False,
    "properties": {
        "method": {"enum": ["ddt", "ddt_plus", "scda"]},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "box", "noisy", "noise_rate", "component_size"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string"},
                    "box": {"oneOf": [BOX, {"type": "null"}]},
                    "noisy": {"type": "boolean"},
                    "noise_rate": {"type": "number", "minimum": 0, "maximum": 1},
                    "component_size": {"type": "integer", "minimum": 0},
                },
            },
        },
    },
}

REPORT = {
    "type": "object",
    "required": ["corloc", "evaluated", "correct", "per_image"],
    "additionalProperties": False,
    "properties": {
        "corloc": {"type": "number", "minimum": 0, "maximum": 100},
        "evaluated": {"type": "integer", "minimum": 0},
        "correct": {"type": "integer", "minimum": 0},
        "per_image": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "iou", "correct"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string"},
                    "iou": {"oneOf": [{"type": "number"}, {"type": "null"}]},
                    "correct": {"type": "boolean"},
                },
            },
        },
    },
}

MANIFEST = {
    "type": "object",
    "required": ["set_name", "images"],
    "properties": {
        "set_name": {"type": "string"},
        "images": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "width", "height", "layers"],
                "properties": {
                    "id": {"type": "string"},
                    "width": {"type": "integer", "minimum": 1},
                    "height": {"type": "integer", "minimum": 1},
                    "layers": {
                        "type": "object",
                        "required": ["last"],
                        "properties": {
                            "last": {"type": "string"},
                            "prev": {"type": "string"},
                        },
                    },
                    "gt_boxes": {"type": "array", "items": BOX},
                    "noisy": {"type": "boolean"},
                },
            },
        },
    },
}
