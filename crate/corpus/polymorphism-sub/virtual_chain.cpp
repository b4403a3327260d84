struct A {
  virtual int f() { return 1; }
  int twice() { return f() * 2; }
};
struct B : A {
  int f() { return 3; }
};
struct C : B {
  int f() { return 5; }
};
int main() {
  A *p = new C();
  int r = p->twice();
  delete p;
  assert(r == 6);
  return 0;
}
