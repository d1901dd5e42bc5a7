"""placeholder"""
class VerifyConfig: pass
class VerifyReport: pass
def run_verify(*a, **k): raise NotImplementedError
