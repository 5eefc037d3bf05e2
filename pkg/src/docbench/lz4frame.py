"""LZ4 frame compression via ctypes over the system liblz4.

One frame per document gives random access into the data file. Frames are
produced with a fixed preferences block (fast level 0, linked 64K blocks,
no per-frame content checksum; integrity is covered by the index checksum),
so building twice from the same input is byte-identical. ctypes releases
the GIL around the library calls, which matters for the threaded benchmark
regimes.
"""

from __future__ import annotations

import ctypes
import ctypes.util
import threading

from .errors import CompressionError

_LZ4F_VERSION = 100


class _FrameInfo(ctypes.Structure):
    _fields_ = [
        ("blockSizeID", ctypes.c_int),
        ("blockMode", ctypes.c_int),
        ("contentChecksumFlag", ctypes.c_int),
        ("frameType", ctypes.c_int),
        ("contentSize", ctypes.c_ulonglong),
        ("dictID", ctypes.c_uint),
        ("blockChecksumFlag", ctypes.c_int),
    ]


class _Preferences(ctypes.Structure):
    _fields_ = [
        ("frameInfo", _FrameInfo),
        ("compressionLevel", ctypes.c_int),
        ("autoFlush", ctypes.c_uint),
        ("favorDecSpeed", ctypes.c_uint),
        ("reserved", ctypes.c_uint * 3),
    ]


def _load_library():
    candidates = ["liblz4.so.1", "liblz4.so", "liblz4.dylib"]
    found = ctypes.util.find_library("lz4")
    if found:
        candidates.insert(0, found)
    last_err = None
    for name in candidates:
        try:
            return ctypes.CDLL(name)
        except OSError as exc:
            last_err = exc
    raise CompressionError(f"liblz4 shared library not found: {last_err}")


_lib = _load_library()

_lib.LZ4F_isError.restype = ctypes.c_uint
_lib.LZ4F_isError.argtypes = [ctypes.c_size_t]
_lib.LZ4F_getErrorName.restype = ctypes.c_char_p
_lib.LZ4F_getErrorName.argtypes = [ctypes.c_size_t]
_lib.LZ4F_compressFrameBound.restype = ctypes.c_size_t
_lib.LZ4F_compressFrameBound.argtypes = [ctypes.c_size_t, ctypes.POINTER(_Preferences)]
_lib.LZ4F_compressFrame.restype = ctypes.c_size_t
_lib.LZ4F_compressFrame.argtypes = [
    ctypes.c_void_p,
    ctypes.c_size_t,
    ctypes.c_char_p,
    ctypes.c_size_t,
    ctypes.POINTER(_Preferences),
]
_lib.LZ4F_createDecompressionContext.restype = ctypes.c_size_t
_lib.LZ4F_createDecompressionContext.argtypes = [
    ctypes.POINTER(ctypes.c_void_p),
    ctypes.c_uint,
]
_lib.LZ4F_freeDecompressionContext.restype = ctypes.c_size_t
_lib.LZ4F_freeDecompressionContext.argtypes = [ctypes.c_void_p]
_lib.LZ4F_decompress.restype = ctypes.c_size_t
_lib.LZ4F_decompress.argtypes = [
    ctypes.c_void_p,
    ctypes.c_void_p,
    ctypes.POINTER(ctypes.c_size_t),
    ctypes.c_char_p,
    ctypes.POINTER(ctypes.c_size_t),
    ctypes.c_void_p,
]


def _check(code: int) -> int:
    if _lib.LZ4F_isError(code):
        name = _lib.LZ4F_getErrorName(code)
        raise CompressionError(name.decode("ascii", "replace"))
    return code


def _make_prefs(content_size: int) -> _Preferences:
    prefs = _Preferences()
    prefs.frameInfo.contentSize = content_size
    prefs.compressionLevel = 0
    return prefs


def compress_frame(data: bytes) -> bytes:
    """Compress one document into a standalone LZ4 frame."""
    prefs = _make_prefs(len(data))
    bound = _check(_lib.LZ4F_compressFrameBound(len(data), ctypes.byref(prefs)))
    dst = ctypes.create_string_buffer(bound)
    n = _check(_lib.LZ4F_compressFrame(dst, bound, data, len(data), ctypes.byref(prefs)))
    return dst.raw[:n]


class _DctxSlot(threading.local):
    def __init__(self):
        self.ctx = None
        self.dirty = False


_dctx = _DctxSlot()


def _get_dctx():
    if _dctx.dirty and _dctx.ctx is not None:
        _lib.LZ4F_freeDecompressionContext(_dctx.ctx)
        _dctx.ctx = None
        _dctx.dirty = False
    if _dctx.ctx is None:
        ctx = ctypes.c_void_p()
        _check(_lib.LZ4F_createDecompressionContext(ctypes.byref(ctx), _LZ4F_VERSION))
        _dctx.ctx = ctx
    return _dctx.ctx


def decompress_frame(frame: bytes, expected_size: int) -> bytes:
    """Decompress one frame that must expand to exactly expected_size bytes.

    The decompression context is reused per thread; a context that errored
    mid-frame is discarded before the next call.
    """
    ctx = _get_dctx()
    out = ctypes.create_string_buffer(expected_size if expected_size else 1)
    produced = 0
    consumed = 0
    _dctx.dirty = True
    while True:
        dst_size = ctypes.c_size_t(expected_size - produced)
        src_size = ctypes.c_size_t(len(frame) - consumed)
        rc = _check(
            _lib.LZ4F_decompress(
                ctx,
                ctypes.byref(out, produced),
                ctypes.byref(dst_size),
                frame[consumed:] if consumed else frame,
                ctypes.byref(src_size),
                None,
            )
        )
        produced += dst_size.value
        consumed += src_size.value
        if rc == 0:
            break
        if consumed >= len(frame) or (src_size.value == 0 and dst_size.value == 0):
            raise CompressionError("frame ended before decode completed")
    _dctx.dirty = False
    if consumed != len(frame) or produced != expected_size:
        _dctx.dirty = True
        raise CompressionError(
            f"frame decoded to {produced} bytes (expected {expected_size}), "
            f"consumed {consumed}/{len(frame)}"
        )
    return out.raw[:produced]
