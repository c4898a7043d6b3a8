from .pipeline import analyze, roundtrip, synthesize
from .wav import AudioBuffer, read_wav, write_wav
from .container import MdatFile, read_mdat, write_mdat
