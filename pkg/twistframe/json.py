import json as json_module
from typing import IO, Any, Dict, List, Union

import numpy as np

JSONType = Union[str, int, float, bool, None, Dict[str, Any], List[Any]]


def to_jsonable(data: Any) -> Any:
    """Convert numpy values, complex numbers, tuples and bytes into plain JSON types.

    Complex numbers become {"re": ..., "im": ...}; arrays become (nested) lists.
    """
    if isinstance(data, (bytes, bytearray)):
        return data.decode("utf-8")
    if isinstance(data, dict):
        return {str(k): to_jsonable(v) for k, v in data.items()}
    if isinstance(data, (list, tuple)):
        return [to_jsonable(v) for v in data]
    if isinstance(data, np.ndarray):
        return [to_jsonable(v) for v in data.tolist()]
    if isinstance(data, (np.bool_,)):
        return bool(data)
    if isinstance(data, np.integer):
        return int(data)
    if isinstance(data, (complex, np.complexfloating)):
        return {"re": float(data.real), "im": float(data.imag)}
    if isinstance(data, np.floating):
        return float(data)
    return data


def dumps(obj: Any, **kwargs: Any) -> str:
    try:
        ret = json_module.dumps(obj, **kwargs)
    except TypeError:
        # the built-in json module does not know about numpy or complex values,
        # so convert those if we get a TypeError exception.
        ret = json_module.dumps(to_jsonable(obj), **kwargs)
    return ret


def dump(obj: Any, fp: IO[str], **kwargs: Any) -> None:
    # dump() writes incrementally, so a TypeError could leave a partial
    # document behind: serialize first.
    fp.write(dumps(obj, **kwargs))


def load(fp: Any, **kwargs: Any) -> Any:
    return json_module.load(fp, **kwargs)


def loads(s: Union[str, bytes], **kwargs: Any) -> Any:
    return json_module.loads(s, **kwargs)
